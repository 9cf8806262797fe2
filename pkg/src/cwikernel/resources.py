"""Immutable lexical resources: a WordNet 3.0 database and word-embedding
tables loaded from plain-text files.

WordNet is read from ``index.{noun,verb,adj,adv}`` and
``data.{noun,verb,adj,adv}`` in the standard 3.0 database layout (header
lines starting with whitespace are skipped, ``w_cnt`` is hexadecimal,
``p_cnt`` decimal, the gloss follows a `` | `` separator).  Embeddings are
read from the usual ``word v1 ... vd`` text format shared by GloVe and the
word2vec text export; an optional ``count dim`` header line is tolerated.

All lookups lowercase their key (WordNet keys additionally map spaces to
underscores).  Nothing here ever hands out a vector containing NaN or
infinity; malformed values fail the load instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np

from .errors import ResourceError

POS_NAMES = ("noun", "verb", "adj", "adv")

_POS_LETTER = {"noun": "n", "verb": "v", "adj": "a", "adv": "r"}
_LETTER_POS = {"n": "noun", "v": "verb", "a": "adj", "s": "adj", "r": "adv"}

_POINTER_KINDS = {
    "@": "hypernym",
    "@i": "hypernym",
    "~": "hyponym",
    "~i": "hyponym",
    "%p": "meronym",
    "%s": "meronym",
    "%m": "meronym",
    "#p": "holonym",
    "#s": "holonym",
    "#m": "holonym",
    "*": "entailment",
    "&": "similar-to",
    "!": "antonym",
    "=": "attribute",
    "^": "also-see",
    "+": "derivationally-related",
}

# One-hop neighbourhoods used when building sense bags, per part of speech.
DEFAULT_RELATION_SETS: Mapping[str, tuple[str, ...]] = {
    "noun": ("hypernym", "hyponym", "meronym", "holonym"),
    "verb": ("hypernym", "hyponym", "entailment", "also-see"),
    "adj": ("similar-to", "antonym", "attribute", "also-see"),
    "adv": ("antonym", "derivationally-related"),
}


@dataclass(frozen=True)
class Synset:
    """One WordNet sense group: lemmas, gloss, and outgoing relations."""

    id: str
    pos: str
    lemmas: tuple[str, ...]
    gloss: str
    relations: Mapping[str, tuple[str, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class WordNetDb:
    """Fully linked WordNet database; immutable after load."""

    index: Mapping[str, Mapping[str, tuple[str, ...]]]
    synsets: Mapping[str, Synset]

    def synset_ids(self, lemma: str) -> dict[str, tuple[str, ...]]:
        """Per-POS synset ids for a lemma; {} when unknown."""
        entry = self.index.get(_normalize_lemma(lemma))
        return dict(entry) if entry else {}

    def synsets_for(self, lemma: str) -> list[Synset]:
        """All synsets of a lemma in POS order noun/verb/adj/adv, keeping
        the sense order of the index file within each POS."""
        entry = self.index.get(_normalize_lemma(lemma))
        if not entry:
            return []
        out: list[Synset] = []
        for pos in POS_NAMES:
            for sid in entry.get(pos, ()):
                out.append(self.synsets[sid])
        return out


def _normalize_lemma(lemma: str) -> str:
    return lemma.lower().replace(" ", "_")


def _data_lines(path: Path) -> Iterable[tuple[int, str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ResourceError(f"cannot read {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line or line[0].isspace():
            continue  # license header / blank
        yield lineno, line


def _parse_data_file(path: Path, file_pos: str) -> dict[str, Synset]:
    synsets: dict[str, Synset] = {}
    for lineno, line in _data_lines(path):
        head, sep, gloss = line.partition(" | ")
        if not sep or not gloss.strip():
            raise ResourceError(f"{path}:{lineno}: synset line has no gloss")
        tokens = head.split()
        try:
            offset = int(tokens[0])
            ss_type = tokens[2]
            w_cnt = int(tokens[3], 16)
            words = tuple(tokens[4 + 2 * i] for i in range(w_cnt))
            p_base = 4 + 2 * w_cnt
            p_cnt = int(tokens[p_base])
            relations: dict[str, list[str]] = {}
            for i in range(p_cnt):
                sym, tgt_offset, tgt_pos, _src = tokens[
                    p_base + 1 + 4 * i : p_base + 5 + 4 * i
                ]
                kind = _POINTER_KINDS.get(sym)
                if kind is None:
                    continue
                tgt_id = f"{'a' if tgt_pos == 's' else tgt_pos}{int(tgt_offset):08d}"
                relations.setdefault(kind, [])
                if tgt_id not in relations[kind]:
                    relations[kind].append(tgt_id)
        except (IndexError, ValueError):
            raise ResourceError(f"{path}:{lineno}: malformed synset line") from None
        if ss_type not in ("n", "v", "a", "s", "r"):
            raise ResourceError(f"{path}:{lineno}: unknown synset type {ss_type!r}")
        sid = f"{_POS_LETTER[file_pos]}{offset:08d}"
        if sid in synsets:
            raise ResourceError(f"{path}:{lineno}: duplicate synset offset {offset}")
        synsets[sid] = Synset(
            id=sid,
            pos=_LETTER_POS[ss_type],
            lemmas=words,
            gloss=gloss.strip(),
            relations={k: tuple(v) for k, v in relations.items()},
        )
    return synsets


def _parse_index_file(
    path: Path, file_pos: str
) -> dict[str, tuple[str, ...]]:
    entries: dict[str, tuple[str, ...]] = {}
    for lineno, line in _data_lines(path):
        tokens = line.split()
        try:
            lemma = tokens[0]
            synset_cnt = int(tokens[2])
            p_cnt = int(tokens[3])
            offsets = tokens[4 + p_cnt + 2 : 4 + p_cnt + 2 + synset_cnt]
            if len(offsets) != synset_cnt:
                raise ValueError
            ids = tuple(
                f"{_POS_LETTER[file_pos]}{int(off):08d}" for off in offsets
            )
        except (IndexError, ValueError):
            raise ResourceError(f"{path}:{lineno}: malformed index line") from None
        entries[lemma.lower()] = ids
    return entries


def load_wordnet(directory: str | Path) -> WordNetDb:
    """Load a WordNet 3.0-style database directory and link it fully.

    Raises ResourceError when a file is missing, a line is malformed, an
    index entry names a nonexistent synset, or a relation dangles.
    """
    directory = Path(directory)
    synsets: dict[str, Synset] = {}
    index: dict[str, dict[str, tuple[str, ...]]] = {}
    for pos in POS_NAMES:
        data_path = directory / f"data.{pos}"
        index_path = directory / f"index.{pos}"
        for p in (data_path, index_path):
            if not p.is_file():
                raise ResourceError(f"missing WordNet file: {p}")
        synsets.update(_parse_data_file(data_path, pos))
    for pos in POS_NAMES:
        for lemma, ids in _parse_index_file(directory / f"index.{pos}", pos).items():
            for sid in ids:
                if sid not in synsets:
                    raise ResourceError(
                        f"index.{pos}: lemma {lemma!r} references missing synset "
                        f"offset {sid[1:]}"
                    )
            index.setdefault(lemma, {})[pos] = ids
    for synset in synsets.values():
        for kind, tgt_ids in synset.relations.items():
            for tgt in tgt_ids:
                if tgt not in synsets:
                    raise ResourceError(
                        f"synset {synset.id}: dangling {kind} pointer to offset "
                        f"{tgt[1:]}"
                    )
    return WordNetDb(index=index, synsets=synsets)


def sense_count(db: WordNetDb, lemma: str) -> int:
    """Total number of synsets listing the lemma, across all POS; 0 when
    the word is unknown."""
    return sum(len(ids) for ids in db.synset_ids(lemma).values())


def related_synsets(
    db: WordNetDb,
    synset: Synset,
    relation_sets: Mapping[str, tuple[str, ...]] = DEFAULT_RELATION_SETS,
) -> list[Synset]:
    """Synsets one hop away via the POS-appropriate relation kinds.

    Order is deterministic: relation kinds in their configured order, target
    ids sorted within each kind, duplicates dropped on first occurrence.
    """
    out: list[Synset] = []
    seen: set[str] = set()
    for kind in relation_sets.get(synset.pos, ()):
        for tgt in sorted(synset.relations.get(kind, ())):
            if tgt not in seen:
                seen.add(tgt)
                out.append(db.synsets[tgt])
    return out


@dataclass(frozen=True)
class EmbeddingTable:
    """Pretrained word vectors of one fixed dimension, keyed case-insensitively."""

    dim: int
    vectors: Mapping[str, np.ndarray]

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


def load_embeddings(stream: IO[str] | Iterable[str]) -> EmbeddingTable:
    """Load ``word v1 ... vd`` lines into an EmbeddingTable.

    The first line may be a ``count dim`` header.  Dimension mismatches and
    non-finite values are load errors naming the line.  When two lines share
    a word (case-insensitively), the first one wins.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    for lineno, line in enumerate(stream, start=1):
        tokens = line.split()
        if not tokens:
            continue
        if lineno == 1 and len(tokens) == 2:
            try:
                int(tokens[0]), int(tokens[1])
                continue  # word2vec-style header
            except ValueError:
                pass
        if len(tokens) < 2:
            raise ResourceError(f"embeddings line {lineno}: no vector components")
        word = tokens[0].lower()
        try:
            vec = np.array([float(t) for t in tokens[1:]], dtype=np.float64)
        except ValueError:
            raise ResourceError(
                f"embeddings line {lineno}: non-numeric vector component"
            ) from None
        if not np.all(np.isfinite(vec)):
            raise ResourceError(f"embeddings line {lineno}: non-finite vector component")
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise ResourceError(
                f"embeddings line {lineno}: dimension {len(vec)} != {dim}"
            )
        if word not in vectors:
            vec.flags.writeable = False
            vectors[word] = vec
    if dim is None:
        raise ResourceError("embedding file contains no vectors")
    return EmbeddingTable(dim=dim, vectors=vectors)


def embed(table: EmbeddingTable, word: str) -> np.ndarray | None:
    """Exact-match lookup after lowercasing; None when absent."""
    return table.vectors.get(word.lower())


@dataclass(frozen=True)
class ResourceBundle:
    """The three resources feature extraction needs: WordNet, the context
    embedding table (similarity and sense features), and the grid embedding
    table (2-D projection features).  One file may serve both roles."""

    wordnet: WordNetDb
    context_embeddings: EmbeddingTable
    grid_embeddings: EmbeddingTable


def _load_embedding_file(path: str | Path) -> EmbeddingTable:
    try:
        with open(path, encoding="utf-8") as fh:
            return load_embeddings(fh)
    except OSError as exc:
        raise ResourceError(f"cannot read embeddings {path}: {exc}") from None


def load_resources(
    wordnet_dir: str | Path,
    context_embeddings_path: str | Path,
    grid_embeddings_path: str | Path,
) -> ResourceBundle:
    db = load_wordnet(wordnet_dir)
    context = _load_embedding_file(context_embeddings_path)
    if Path(grid_embeddings_path).resolve() == Path(context_embeddings_path).resolve():
        grid = context
    else:
        grid = _load_embedding_file(grid_embeddings_path)
    return ResourceBundle(
        wordnet=db, context_embeddings=context, grid_embeddings=grid
    )
