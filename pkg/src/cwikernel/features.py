"""Feature extraction: turn an annotated instance plus lexical resources
into one fixed-layout numeric vector.

Layout, in order:

* dense block (18): char_count, vowel_count, consonant_count, vowel_pct,
  consonant_pct, repeat_runs, sense_count, pos one-hot over
  noun/verb/adj/adv/other, then min/max/mean cosine of the target against
  context words, then min/max/mean cosine of target sense embeddings
  against context sense embeddings;
* hashed character n-gram counts, one bucket namespace per order;
* spatial-grid one-hot over the 2-D embedding projection, one segment per
  grid size (4 + 16 + 64 + 256 + 1024 = 1364 with the default sizes).

Multi-word targets are featurized per constituent word and summed
elementwise across all blocks.  Disabled feature families leave their block
zeroed so the layout never shifts.  No output coordinate is ever NaN or
infinite; a violation raises instead of propagating.

Tokenization everywhere is deliberately plain: whitespace split, strip
leading/trailing non-alphanumerics, lowercase.  Context words are the
distinct tokens outside the target span.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .corpus import Instance
from .errors import DataError
from .numeric import PcaModel, componentwise_median, cosine, pca_project
from .resources import (
    DEFAULT_RELATION_SETS,
    EmbeddingTable,
    ResourceBundle,
    Synset,
    WordNetDb,
    embed,
    related_synsets,
)
from .stopwords import STOPWORDS

VOWELS = frozenset("aeiou")
POS_ONEHOT_ORDER = ("noun", "verb", "adj", "adv", "other")
ALL_FAMILIES = ("chars", "ngrams", "wordnet", "word_sim", "sense_sim", "grid")

DENSE_LEN = 18
_SENSE_COUNT_IDX = 6
_POS_BASE = 7
_WORD_SIM_BASE = 12
_SENSE_SIM_BASE = 15

_GLOSS_TOKEN_RE = re.compile(r"[^\W\d_]+", re.UNICODE)
_TOKEN_RE = re.compile(r"\S+")

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash; fixed here so bucket assignments never vary
    across platforms or processes."""
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass(frozen=True)
class FeatureConfig:
    ngram_orders: tuple[int, ...] = (1, 2, 3, 4)
    ngram_buckets_per_order: int = 4096
    grid_sizes: tuple[int, ...] = (2, 4, 8, 16, 32)
    scaling: str = "minmax"
    families: tuple[str, ...] = ALL_FAMILIES

    def __post_init__(self) -> None:
        if not self.ngram_orders or any(n < 1 for n in self.ngram_orders):
            raise ValueError("ngram orders must be positive")
        if self.ngram_buckets_per_order < 1:
            raise ValueError("ngram_buckets_per_order must be positive")
        if not self.grid_sizes or any(s < 1 for s in self.grid_sizes):
            raise ValueError("grid sizes must be positive")
        if self.scaling not in ("minmax", "none"):
            raise ValueError(f"unknown scaling mode {self.scaling!r}")
        unknown = set(self.families) - set(ALL_FAMILIES)
        if unknown:
            raise ValueError(f"unknown feature families: {sorted(unknown)}")

    @property
    def ngram_block_len(self) -> int:
        return len(self.ngram_orders) * self.ngram_buckets_per_order

    @property
    def grid_block_len(self) -> int:
        return sum(s * s for s in self.grid_sizes)

    @property
    def total_len(self) -> int:
        return DENSE_LEN + self.ngram_block_len + self.grid_block_len

    def to_dict(self) -> dict:
        return {
            "ngram_orders": list(self.ngram_orders),
            "ngram_buckets_per_order": self.ngram_buckets_per_order,
            "grid_sizes": list(self.grid_sizes),
            "scaling": self.scaling,
            "families": list(self.families),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        return cls(
            ngram_orders=tuple(d["ngram_orders"]),
            ngram_buckets_per_order=d["ngram_buckets_per_order"],
            grid_sizes=tuple(d["grid_sizes"]),
            scaling=d["scaling"],
            families=tuple(d["families"]),
        )


@dataclass(frozen=True)
class GridBounds:
    """Per-axis extent of the training projections; inference points outside
    are clamped into the edge bins."""

    min1: float
    max1: float
    min2: float
    max2: float


@dataclass(frozen=True)
class ScalerState:
    """Per-dense-coordinate training min/max for min-max scaling."""

    mins: np.ndarray
    maxs: np.ndarray


# --------------------------------------------------------------------------
# tokenization


def tokenize_with_spans(text: str) -> Iterator[tuple[str, int, int]]:
    """Yield (token, char_start, char_end) for whitespace-separated chunks,
    with leading/trailing non-alphanumerics stripped and the token
    lowercased.  Chunks that are all punctuation vanish."""
    for m in _TOKEN_RE.finditer(text):
        start, end = m.start(), m.end()
        while start < end and not text[start].isalnum():
            start += 1
        while end > start and not text[end - 1].isalnum():
            end -= 1
        if end > start:
            yield text[start:end].lower(), start, end


def tokenize(text: str) -> list[str]:
    return [tok for tok, _, _ in tokenize_with_spans(text)]


def context_words(instance: Instance) -> list[str]:
    """Distinct lowercased tokens of the sentence outside the target span,
    sorted for determinism."""
    span_start, span_end = instance.target_char_span()
    seen = set()
    for tok, start, end in tokenize_with_spans(instance.sentence):
        if end <= span_start or start >= span_end:
            seen.add(tok)
    return sorted(seen)


# --------------------------------------------------------------------------
# character-level features


def char_stats(word: str) -> tuple[float, float, float, float, float, float]:
    """(char_count, vowel_count, consonant_count, vowel_pct, consonant_pct,
    repeat_runs) over the word's alphabetic characters; repeat runs are
    maximal same-character runs of length >= 2 anywhere in the word."""
    w = word.lower()
    n_alpha = 0
    n_vowel = 0
    for c in w:
        if c.isalpha():
            n_alpha += 1
            if c in VOWELS:
                n_vowel += 1
    n_cons = n_alpha - n_vowel
    vowel_pct = n_vowel / n_alpha if n_alpha else 0.0
    cons_pct = n_cons / n_alpha if n_alpha else 0.0
    runs = 0
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        if j - i >= 2:
            runs += 1
        i = j
    return (
        float(n_alpha),
        float(n_vowel),
        float(n_cons),
        vowel_pct,
        cons_pct,
        float(runs),
    )


def char_ngrams(word: str, config: FeatureConfig) -> np.ndarray:
    """Hashed n-gram counts of the lowercased word padded with ^ and $;
    each order hashes into its own bucket namespace."""
    out = np.zeros(config.ngram_block_len, dtype=np.float64)
    if not word:
        return out
    padded = "^" + word.lower() + "$"
    buckets = config.ngram_buckets_per_order
    for oi, n in enumerate(config.ngram_orders):
        base = oi * buckets
        for i in range(len(padded) - n + 1):
            h = fnv1a64(padded[i : i + n].encode("utf-8"))
            out[base + h % buckets] += 1.0
    return out


# --------------------------------------------------------------------------
# WordNet-derived features


def wordnet_features(db: WordNetDb, target: str) -> tuple[int, np.ndarray]:
    """(total sense count, one-hot over noun/verb/adj/adv/other).  The POS
    slot is the one with the most synsets; ties prefer noun, then verb,
    then adj, then adv; no synsets at all means 'other'."""
    by_pos = db.synset_ids(target)
    total = sum(len(ids) for ids in by_pos.values())
    onehot = np.zeros(len(POS_ONEHOT_ORDER), dtype=np.float64)
    if total == 0:
        onehot[POS_ONEHOT_ORDER.index("other")] = 1.0
        return 0, onehot
    best_pos = None
    best = -1
    for pos in POS_ONEHOT_ORDER[:4]:
        n = len(by_pos.get(pos, ()))
        if n > best:
            best = n
            best_pos = pos
    onehot[POS_ONEHOT_ORDER.index(best_pos)] = 1.0
    return total, onehot


def sense_bag(
    db: WordNetDb,
    synset: Synset,
    relation_sets=DEFAULT_RELATION_SETS,
) -> list[str]:
    """Multiset of lowercased alphabetic gloss words of the synset and its
    one-hop related synsets, with stopwords removed."""
    words = _GLOSS_TOKEN_RE.findall(synset.gloss.lower())
    for rel in related_synsets(db, synset, relation_sets):
        words.extend(_GLOSS_TOKEN_RE.findall(rel.gloss.lower()))
    return [w for w in words if w not in STOPWORDS]


def sense_embedding(bag: Sequence[str], table: EmbeddingTable) -> np.ndarray | None:
    """Componentwise median over the embeddings of in-vocabulary bag words
    (keeping multiplicity); None when nothing is in vocabulary."""
    vecs = [v for v in (embed(table, w) for w in bag) if v is not None]
    if not vecs:
        return None
    return componentwise_median(vecs)


class SenseEmbeddingCache:
    """Memo of per-word sense embeddings for one featurization run."""

    def __init__(self, db: WordNetDb, table: EmbeddingTable):
        self.db = db
        self.table = table
        self._cache: dict[str, list[np.ndarray]] = {}

    def for_word(self, word: str) -> list[np.ndarray]:
        hit = self._cache.get(word)
        if hit is None:
            hit = []
            for synset in self.db.synsets_for(word):
                se = sense_embedding(sense_bag(self.db, synset), self.table)
                if se is not None:
                    hit.append(se)
            self._cache[word] = hit
        return hit


# --------------------------------------------------------------------------
# context similarity statistics


def _similarity_stats(sims: list[float]) -> tuple[float, float, float]:
    if not sims:
        return 0.0, 0.0, 0.0
    return min(sims), max(sims), sum(sims) / len(sims)


def _word_similarity_stats(
    word: str, context: Sequence[str], table: EmbeddingTable
) -> tuple[float, float, float]:
    tvec = embed(table, word)
    if tvec is None:
        return 0.0, 0.0, 0.0
    sims = []
    for ctx_word in context:
        cvec = embed(table, ctx_word)
        if cvec is not None:
            sims.append(cosine(tvec, cvec))
    return _similarity_stats(sims)


def context_word_stats(
    instance: Instance, table: EmbeddingTable
) -> tuple[float, float, float]:
    """(min, max, mean) cosine between the target's embedding and each
    in-vocabulary context word; zeros when the target or every context word
    is out of vocabulary."""
    return _word_similarity_stats(
        instance.target.lower(), context_words(instance), table
    )


def _sense_similarity_stats(
    word: str, context: Sequence[str], cache: SenseEmbeddingCache
) -> tuple[float, float, float]:
    target_senses = cache.for_word(word)
    if not target_senses:
        return 0.0, 0.0, 0.0
    sims = []
    for ctx_word in context:
        for ctx_sense in cache.for_word(ctx_word):
            for tgt_sense in target_senses:
                sims.append(cosine(tgt_sense, ctx_sense))
    return _similarity_stats(sims)


def context_sense_stats(
    instance: Instance, db: WordNetDb, table: EmbeddingTable
) -> tuple[float, float, float]:
    """(min, max, mean) cosine over every (target sense embedding, context
    sense embedding) pair; zeros when either side has none."""
    cache = SenseEmbeddingCache(db, table)
    return _sense_similarity_stats(
        instance.target.lower(), context_words(instance), cache
    )


# --------------------------------------------------------------------------
# spatial grid


def _bin_index(x: float, lo: float, hi: float, size: int) -> int:
    if hi <= lo:
        return 0
    idx = int(np.floor((x - lo) / (hi - lo) * size))
    return min(max(idx, 0), size - 1)


def grid_onehot(
    word: str,
    pca: PcaModel | None,
    table: EmbeddingTable,
    bounds: GridBounds | None,
    sizes: tuple[int, ...] = (2, 4, 8, 16, 32),
) -> np.ndarray:
    """One-hot of the word's grid cell per size, concatenated; all zeros for
    out-of-vocabulary words.  Cells are indexed row-major, rows along the
    second projection axis."""
    out = np.zeros(sum(s * s for s in sizes), dtype=np.float64)
    if pca is None or bounds is None:
        return out
    vec = embed(table, word)
    if vec is None:
        return out
    p1, p2 = pca_project(pca, vec)
    offset = 0
    for s in sizes:
        col = _bin_index(p1, bounds.min1, bounds.max1, s)
        row = _bin_index(p2, bounds.min2, bounds.max2, s)
        out[offset + row * s + col] = 1.0
        offset += s * s
    return out


# --------------------------------------------------------------------------
# assembly


def _word_feature_vector(
    word: str,
    context: Sequence[str],
    resources: ResourceBundle,
    pca: PcaModel | None,
    bounds: GridBounds | None,
    config: FeatureConfig,
    sense_cache: SenseEmbeddingCache,
) -> np.ndarray:
    vec = np.zeros(config.total_len, dtype=np.float64)
    fams = config.families
    if "chars" in fams:
        vec[0:6] = char_stats(word)
    if "wordnet" in fams:
        total, onehot = wordnet_features(resources.wordnet, word)
        vec[_SENSE_COUNT_IDX] = float(total)
        vec[_POS_BASE : _POS_BASE + 5] = onehot
    if "word_sim" in fams:
        vec[_WORD_SIM_BASE : _WORD_SIM_BASE + 3] = _word_similarity_stats(
            word, context, resources.context_embeddings
        )
    if "sense_sim" in fams:
        vec[_SENSE_SIM_BASE : _SENSE_SIM_BASE + 3] = _sense_similarity_stats(
            word, context, sense_cache
        )
    if "ngrams" in fams:
        vec[DENSE_LEN : DENSE_LEN + config.ngram_block_len] = char_ngrams(word, config)
    if "grid" in fams:
        vec[DENSE_LEN + config.ngram_block_len :] = grid_onehot(
            word, pca, resources.grid_embeddings, bounds, config.grid_sizes
        )
    return vec


def featurize(
    instance: Instance,
    resources: ResourceBundle,
    pca: PcaModel | None,
    bounds: GridBounds | None,
    config: FeatureConfig,
    _sense_cache: SenseEmbeddingCache | None = None,
) -> np.ndarray:
    """Full feature vector for one instance.

    Single-word targets concatenate every family's output; multi-word
    targets sum the per-constituent-word vectors across all blocks.
    """
    cache = _sense_cache or SenseEmbeddingCache(
        resources.wordnet, resources.context_embeddings
    )
    context = context_words(instance)
    vec = np.zeros(config.total_len, dtype=np.float64)
    for word in tokenize(instance.target):
        vec += _word_feature_vector(
            word, context, resources, pca, bounds, config, cache
        )
    if not np.all(np.isfinite(vec)):
        raise DataError(
            f"instance {instance.id!r}: non-finite feature value produced"
        )
    return vec


# --------------------------------------------------------------------------
# scaling


def fit_scaler(vectors: np.ndarray, config: FeatureConfig) -> ScalerState:
    """Record per-dense-coordinate min/max over the training vectors."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise DataError("fit_scaler: empty training list")
    dense = vectors[:, :DENSE_LEN]
    mins = dense.min(axis=0)
    maxs = dense.max(axis=0)
    mins.flags.writeable = False
    maxs.flags.writeable = False
    return ScalerState(mins=mins, maxs=maxs)


def apply_scaler(state: ScalerState, vectors: np.ndarray) -> np.ndarray:
    """Map each dense coordinate to (x - min) / (max - min); constant
    training columns map to 0.  Values outside the training range are NOT
    clamped, so test-time dense features may leave [0, 1].  N-gram and grid
    blocks pass through unchanged."""
    vectors = np.asarray(vectors, dtype=np.float64)
    out = vectors.copy()
    span = state.maxs - state.mins
    dense = vectors[..., :DENSE_LEN]
    scaled = np.where(span > 0, (dense - state.mins) / np.where(span > 0, span, 1.0), 0.0)
    out[..., :DENSE_LEN] = scaled
    return out


# --------------------------------------------------------------------------
# fitting the whole feature space on a training split


@dataclass(frozen=True)
class FeatureSpace:
    """Everything fit on training data that inference must reuse: the
    config, the 2-D projection and its grid bounds, and the dense scaler."""

    config: FeatureConfig
    pca: PcaModel | None
    bounds: GridBounds | None
    scaler: ScalerState | None


def training_vocabulary(instances: Sequence[Instance]) -> list[str]:
    """Distinct constituent words of all targets, sorted."""
    vocab = set()
    for inst in instances:
        vocab.update(tokenize(inst.target))
    return sorted(vocab)


def fit_grid_space(
    instances: Sequence[Instance],
    table: EmbeddingTable,
) -> tuple[PcaModel, GridBounds]:
    """Fit the 2-D projection on the grid embeddings of the training
    vocabulary and record the projection extent."""
    from .numeric import pca_fit  # local import keeps module load cheap

    vocab = [w for w in training_vocabulary(instances) if w in table]
    if len(vocab) < 2:
        raise DataError(
            "grid features need at least 2 in-vocabulary training words"
        )
    rows = np.vstack([embed(table, w) for w in vocab])
    pca = pca_fit(rows, k=2)
    proj = np.array([pca_project(pca, r) for r in rows])
    bounds = GridBounds(
        min1=float(proj[:, 0].min()),
        max1=float(proj[:, 0].max()),
        min2=float(proj[:, 1].min()),
        max2=float(proj[:, 1].max()),
    )
    return pca, bounds


def fit_feature_space(
    train_instances: Sequence[Instance],
    resources: ResourceBundle,
    config: FeatureConfig,
) -> tuple[FeatureSpace, np.ndarray]:
    """Fit projection, bounds, and scaler on the training split and return
    (space, scaled training matrix)."""
    pca = bounds = None
    if "grid" in config.families:
        pca, bounds = fit_grid_space(train_instances, resources.grid_embeddings)
    cache = SenseEmbeddingCache(resources.wordnet, resources.context_embeddings)
    raw = featurize_all(train_instances, resources, pca, bounds, config, cache)
    scaler = None
    if config.scaling == "minmax":
        if raw.shape[0] == 0:
            raise DataError("fit_feature_space: empty training split")
        scaler = fit_scaler(raw, config)
        raw = apply_scaler(scaler, raw)
    space = FeatureSpace(config=config, pca=pca, bounds=bounds, scaler=scaler)
    return space, raw


def featurize_all(
    instances: Sequence[Instance],
    resources: ResourceBundle,
    pca: PcaModel | None,
    bounds: GridBounds | None,
    config: FeatureConfig,
    cache: SenseEmbeddingCache | None = None,
) -> np.ndarray:
    """Raw (unscaled) feature matrix, one row per instance in order."""
    cache = cache or SenseEmbeddingCache(
        resources.wordnet, resources.context_embeddings
    )
    out = np.zeros((len(instances), config.total_len), dtype=np.float64)
    for i, inst in enumerate(instances):
        out[i] = featurize(inst, resources, pca, bounds, config, _sense_cache=cache)
    return out


def featurize_dataset(
    instances: Sequence[Instance],
    resources: ResourceBundle,
    space: FeatureSpace,
) -> np.ndarray:
    """Feature matrix under a fitted space (scaled when the space has a
    scaler)."""
    raw = featurize_all(instances, resources, space.pca, space.bounds, space.config)
    if space.scaler is not None:
        raw = apply_scaler(space.scaler, raw)
    return raw
