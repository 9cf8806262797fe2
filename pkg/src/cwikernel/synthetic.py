"""Generator for the shipped synthetic fixture: a labeled corpus, a toy
WordNet database, and two toy embedding tables.

The fixture is small but structurally faithful: WordNet files carry real
byte offsets and cross-part-of-speech pointers, sentences contain multi-byte
UTF-8 characters so byte and character offsets differ, targets include
two-word phrases, and annotation counts follow the 10 native + 10 non-native
scheme so probabilities land on exact 0.05 steps.  Complex targets are long
morphologically heavy words, simple targets short common ones, with a little
annotator noise, so a trained model separates them well but not perfectly.

Generation is deterministic for a fixed seed.  ``write_all(out_dir)``
produces::

    train.tsv  valid.tsv  test.tsv  context.vec  grid.vec
    wordnet/{index,data}.{noun,verb,adj,adv}
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

SEED = 20180423
ANNOTATORS_NATIVE = 10
ANNOTATORS_NONNATIVE = 10

_POS_LETTER = {"noun": "n", "verb": "v", "adj": "a", "adv": "r"}

_HEADER = (
    "  1 synthetic lexical database for pipeline tests\n"
    "  2 layout follows the WordNet 3.0 database file format\n"
)


# --------------------------------------------------------------------------
# toy WordNet definition


@dataclass(frozen=True)
class ToySynset:
    key: str  # internal handle used only while generating
    pos: str  # which data.{pos} file the synset lives in
    ss_type: str  # n / v / a / s / r
    lemmas: tuple[str, ...]
    gloss: str
    pointers: tuple[tuple[str, str], ...] = ()  # (symbol, target key)
    frames: str = ""  # verb frame section, already formatted


def _syn(key, pos, ss, lemmas, gloss, pointers=(), frames=""):
    return ToySynset(key, pos, ss, tuple(lemmas), gloss, tuple(pointers), frames)


TOY_SYNSETS: tuple[ToySynset, ...] = (
    # nouns
    _syn("n.entity", "noun", "n", ["entity"],
         "that which is known to exist in the world",
         [("~", "n.animal"), ("~", "n.plant"), ("~", "n.object"),
          ("~", "n.time"), ("~", "n.size")]),
    _syn("n.animal", "noun", "n", ["animal", "beast"],
         "a living creature that can move and eat",
         [("@", "n.entity"), ("~", "n.cat"), ("~", "n.dog"), ("~", "n.bird"),
          ("~", "n.fish"), ("~", "n.bat1"), ("~", "n.person")]),
    _syn("n.plant", "noun", "n", ["plant"],
         "a living thing that grows in soil and does not move",
         [("@", "n.entity"), ("~", "n.tree"), ("~", "n.flower")]),
    _syn("n.object", "noun", "n", ["object", "thing"],
         "a thing that can be seen and touched",
         [("@", "n.entity"), ("~", "n.bat2"), ("~", "n.stone"),
          ("~", "n.house"), ("~", "n.water")]),
    _syn("n.cat", "noun", "n", ["cat"],
         "a small animal with soft fur that chases mice",
         [("@", "n.animal")]),
    _syn("n.dog", "noun", "n", ["dog", "hound"],
         "a friendly animal that barks and guards the house",
         [("@", "n.animal")]),
    _syn("n.bird", "noun", "n", ["bird"],
         "an animal with wings and feathers that can sing",
         [("@", "n.animal")]),
    _syn("n.fish", "noun", "n", ["fish"],
         "an animal that lives in water and can swim",
         [("@", "n.animal")]),
    _syn("n.bat1", "noun", "n", ["bat"],
         "an animal with wings that flies in the night",
         [("@", "n.animal")]),
    _syn("n.bat2", "noun", "n", ["bat", "club"],
         "a heavy stick used to hit a ball",
         [("@", "n.object")]),
    _syn("n.tree", "noun", "n", ["tree"],
         "a tall plant with a trunk and branches of wood",
         [("@", "n.plant"), ("#p", "n.branch")]),
    _syn("n.branch", "noun", "n", ["branch"],
         "the part of a tree where leaves grow",
         [("%p", "n.tree")]),
    _syn("n.flower", "noun", "n", ["flower", "bloom"],
         "the colorful part of a plant",
         [("@", "n.plant")]),
    _syn("n.house", "noun", "n", ["house", "home"],
         "a building where people live and sleep",
         [("@", "n.object")]),
    _syn("n.stone", "noun", "n", ["stone", "rock"],
         "a small hard piece of a mountain",
         [("@", "n.object")]),
    _syn("n.water", "noun", "n", ["water"],
         "a clear liquid that people drink and fish swim in",
         [("@", "n.object"), ("~", "n.rain"), ("~", "n.milk"), ("~", "n.river")]),
    _syn("n.fire", "noun", "n", ["fire"],
         "hot light and heat that burns wood",
         [("@", "n.object")]),
    _syn("n.rain", "noun", "n", ["rain"],
         "water that falls from the sky",
         [("@", "n.water")]),
    _syn("n.bread", "noun", "n", ["bread"],
         "a food made from flour that people eat",
         [("@", "n.object")]),
    _syn("n.milk", "noun", "n", ["milk"],
         "a white drink that comes from a cow",
         [("@", "n.water")]),
    _syn("n.hand", "noun", "n", ["hand"],
         "the part of the body used to hold things",
         [("%p", "n.body")]),
    _syn("n.body", "noun", "n", ["body"],
         "the whole physical form of a person or animal",
         [("@", "n.object"), ("#p", "n.hand")]),
    _syn("n.time", "noun", "n", ["time"],
         "the passing of moments from past to future",
         [("@", "n.entity"), ("~", "n.day"), ("~", "n.night")]),
    _syn("n.day", "noun", "n", ["day"],
         "the time when the sun gives light",
         [("@", "n.time"), ("!", "n.night")]),
    _syn("n.night", "noun", "n", ["night"],
         "the dark time when people sleep",
         [("@", "n.time"), ("!", "n.day")]),
    _syn("n.person", "noun", "n", ["person", "human"],
         "a living being that talks and thinks",
         [("@", "n.animal"), ("~", "n.friend")]),
    _syn("n.friend", "noun", "n", ["friend"],
         "a person one knows and likes",
         [("@", "n.person")]),
    _syn("n.mountain", "noun", "n", ["mountain", "mount"],
         "a very high hill of rock and stone",
         [("@", "n.object")]),
    _syn("n.river", "noun", "n", ["river", "stream"],
         "a long body of water that flows to the sea",
         [("@", "n.water")]),
    _syn("n.size", "noun", "n", ["size"],
         "how big or small a thing is",
         [("@", "n.entity")]),
    _syn("n.song", "noun", "n", ["song"],
         "music made with the voice",
         [("@", "n.object"), ("+", "v.sing")]),
    _syn("n.incomprehensibility", "noun", "n", ["incomprehensibility"],
         "the state of being impossible to understand",
         [("@", "n.entity"), ("+", "a.incomprehensible")]),
    _syn("n.photosynthesis", "noun", "n", ["photosynthesis"],
         "the process by which a green plant makes food from light and water",
         [("@", "n.entity")]),
    # verbs
    _syn("v.move", "verb", "v", ["move", "go"],
         "to change place or position",
         [("~", "v.run"), ("~", "v.walk"), ("~", "v.swim"), ("~", "v.fly")],
         frames="02 + 01 00 + 02 00"),
    _syn("v.run", "verb", "v", ["run"],
         "to move fast on foot",
         [("@", "v.move")], frames="01 + 02 00"),
    _syn("v.walk", "verb", "v", ["walk"],
         "to move slowly on foot step by step",
         [("@", "v.move")], frames="01 + 02 00"),
    _syn("v.swim", "verb", "v", ["swim"],
         "to move through water using the body",
         [("@", "v.move")], frames="01 + 02 00"),
    _syn("v.fly", "verb", "v", ["fly"],
         "to move through the air on wings",
         [("@", "v.move")], frames="01 + 02 00"),
    _syn("v.eat", "verb", "v", ["eat"],
         "to take food into the body",
         [("*", "v.chew")], frames="02 + 02 00 + 08 00"),
    _syn("v.chew", "verb", "v", ["chew"],
         "to break food with the teeth",
         [], frames="01 + 08 00"),
    _syn("v.drink", "verb", "v", ["drink"],
         "to take liquid into the body",
         [("^", "v.eat")], frames="01 + 08 00"),
    _syn("v.see", "verb", "v", ["see", "watch"],
         "to use the eyes to know things",
         [], frames="01 + 08 00"),
    _syn("v.sleep", "verb", "v", ["sleep", "rest"],
         "to close the eyes and rest the body at night",
         [], frames="01 + 02 00"),
    _syn("v.snore", "verb", "v", ["snore"],
         "to make a loud sound from the nose while asleep",
         [("*", "v.sleep")], frames="01 + 02 00"),
    _syn("v.sing", "verb", "v", ["sing"],
         "to make music with the voice",
         [("+", "n.song"), ("^", "v.talk")], frames="01 + 02 00"),
    _syn("v.talk", "verb", "v", ["talk", "speak"],
         "to say words to another person",
         [], frames="01 + 02 00"),
    _syn("v.give", "verb", "v", ["give", "hand"],
         "to pass a thing to another person",
         [], frames="01 + 09 00"),
    _syn("v.open", "verb", "v", ["open"],
         "to make a door or box no longer closed",
         [("!", "v.close")], frames="01 + 08 00"),
    _syn("v.close", "verb", "v", ["close", "shut"],
         "to make a door or box no longer open",
         [("!", "v.open")], frames="01 + 08 00"),
    # adjectives
    _syn("a.big", "adj", "a", ["big"],
         "of great size",
         [("!", "a.small"), ("&", "a.large"), ("=", "n.size")]),
    _syn("a.small", "adj", "a", ["small"],
         "of little size",
         [("!", "a.big"), ("&", "a.little"), ("=", "n.size")]),
    _syn("a.large", "adj", "s", ["large"],
         "big in amount or size",
         [("&", "a.big")]),
    _syn("a.little", "adj", "s", ["little"],
         "small and young",
         [("&", "a.small")]),
    _syn("a.good", "adj", "a", ["good"],
         "of high quality and pleasing",
         [("!", "a.bad")]),
    _syn("a.bad", "adj", "a", ["bad"],
         "of low quality and not pleasing",
         [("!", "a.good")]),
    _syn("a.fast", "adj", "a", ["fast", "quick"],
         "moving with great speed",
         [("!", "a.slow"), ("&", "a.rapid")]),
    _syn("a.slow", "adj", "a", ["slow"],
         "moving without speed",
         [("!", "a.fast")]),
    _syn("a.rapid", "adj", "s", ["rapid"],
         "very fast",
         [("&", "a.fast")]),
    _syn("a.warm", "adj", "a", ["warm"],
         "having mild heat like a fire",
         [("!", "a.cold")]),
    _syn("a.cold", "adj", "a", ["cold"],
         "without heat like the night rain",
         [("!", "a.warm")]),
    _syn("a.open", "adj", "a", ["open"],
         "not shut and letting things pass",
         [("!", "a.closed")]),
    _syn("a.closed", "adj", "a", ["closed", "shut"],
         "not open",
         [("!", "a.open")]),
    _syn("a.difficult", "adj", "a", ["difficult", "hard"],
         "not easy to do or understand",
         [("^", "a.incomprehensible")]),
    _syn("a.incomprehensible", "adj", "a", ["incomprehensible"],
         "impossible to understand",
         [("+", "n.incomprehensibility"), ("^", "a.difficult")]),
    # adverbs
    _syn("r.quickly", "adv", "r", ["quickly", "fast"],
         "in a fast way",
         [("!", "r.slowly"), ("+", "a.fast")]),
    _syn("r.slowly", "adv", "r", ["slowly"],
         "in a slow way",
         [("!", "r.quickly"), ("+", "a.slow")]),
    _syn("r.well", "adv", "r", ["well"],
         "in a good way",
         [("!", "r.badly"), ("+", "a.good")]),
    _syn("r.badly", "adv", "r", ["badly"],
         "in a bad way",
         [("!", "r.well"), ("+", "a.bad")]),
)


def _layout_wordnet() -> dict[str, str]:
    """Render the eight database files with correct byte offsets.

    Pass one fixes each synset line's length (offsets are always 8 digits)
    and accumulates byte positions; pass two substitutes the real offsets
    into pointer fields.  Returns {relative filename: content}.
    """
    by_pos: dict[str, list[ToySynset]] = {p: [] for p in _POS_LETTER}
    for synset in TOY_SYNSETS:
        by_pos[synset.pos].append(synset)

    def render(synset: ToySynset, own: str, targets: dict[str, str]) -> str:
        parts = [own, "03", synset.ss_type, f"{len(synset.lemmas):02x}"]
        for lemma in synset.lemmas:
            parts += [lemma, "0"]
        parts.append(f"{len(synset.pointers):03d}")
        for sym, tgt_key in synset.pointers:
            tgt = next(s for s in TOY_SYNSETS if s.key == tgt_key)
            parts += [sym, targets[tgt_key], tgt.ss_type, "0000"]
        if synset.frames:
            parts.append(synset.frames)
        return " ".join(parts) + " | " + synset.gloss

    placeholder = "0" * 8
    offsets: dict[str, str] = {}
    for pos, synsets in by_pos.items():
        running = len(_HEADER.encode("utf-8"))
        fake = {s.key: placeholder for s in TOY_SYNSETS}
        for synset in synsets:
            offsets[synset.key] = f"{running:08d}"
            running += len(render(synset, placeholder, fake).encode("utf-8")) + 1

    files: dict[str, str] = {}
    for pos, synsets in by_pos.items():
        lines = [render(s, offsets[s.key], offsets) for s in synsets]
        files[f"data.{pos}"] = _HEADER + "\n".join(lines) + "\n"
        index: dict[str, list[ToySynset]] = {}
        for synset in synsets:
            for lemma in synset.lemmas:
                index.setdefault(lemma, []).append(synset)
        index_lines = []
        for lemma in sorted(index):
            senses = index[lemma]
            syms: list[str] = []
            for synset in senses:
                for sym, _ in synset.pointers:
                    if sym not in syms:
                        syms.append(sym)
            index_lines.append(" ".join(
                [lemma, _POS_LETTER[pos], str(len(senses)), str(len(syms))]
                + syms
                + [str(len(senses)), "1"]
                + [offsets[s.key] for s in senses]
            ))
        files[f"index.{pos}"] = _HEADER + "\n".join(index_lines) + "\n"
    return files


# --------------------------------------------------------------------------
# toy embeddings

_TOPIC_BASES = {
    "nature": (1.8, 0.0, 0.0, 0.2, 0.0, 0.0, 0.1, 0.0),
    "home": (0.0, 1.8, 0.0, 0.0, 0.2, 0.0, 0.0, 0.1),
    "food": (0.0, 0.2, 1.8, 0.0, 0.0, 0.1, 0.0, 0.0),
    "motion": (0.2, 0.0, 0.0, 1.8, 0.0, 0.0, 0.0, 0.1),
    "quality": (0.0, 0.0, 0.1, 0.0, 1.8, 0.2, 0.0, 0.0),
    "function": (0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3),
    "abstract": (0.0, 0.0, 0.0, 0.0, 0.2, 1.6, 1.0, 0.0),
    "misc": (0.4, 0.4, 0.0, 0.4, 0.0, 0.0, 0.4, 0.4),
}

_TOPIC_WORDS = {
    "nature": """animal beast cat dog bird fish bat tree branch plant flower
        bloom stone rock mountain mount river stream water rain fire sky sun
        soil wood leaves hill sea creature fur mice wings feathers trunk
        night day dark light""",
    "home": """house home building door box room friend person human people
        hand body object thing club stick ball song music voice café chairs
        guards barks""",
    "food": """bread milk food flour cow drink liquid teeth eat chew white
        clear""",
    "motion": """move go run walk swim fly step foot air flows falls chases
        sleep rest snore talk speak sing see watch give pass hold hit burns
        grows""",
    "quality": """big small large little good bad fast quick slow rapid warm
        cold open closed shut heavy soft hard tall long high wide great
        friendly colorful pleasing easy young old new naïve""",
    "function": """the a an and of in on at to from with while near that
        which where when one no not or by for""",
    "abstract": """entity size time state process quality speed amount moments
        past future understand impossible difficult thinks knows likes""",
}

SIMPLE_WORDS = (
    "cat dog bird fish tree house stone water fire rain bread milk hand "
    "day night friend body time person song flower branch bat club river "
    "mountain run walk eat see give talk sing swim sleep drink open close "
    "big small good bad fast slow warm cold little large well badly "
    "quickly slowly café"
).split()

COMPLEX_WORDS = (
    "incomprehensibility photosynthesis deinstitutionalization "
    "counterrevolutionary misappropriation thermodynamics crystallization "
    "unconstitutional pseudoscientific electromagnetism disproportionate "
    "circumnavigation anthropological indistinguishable mischaracterization "
    "overcapitalization phosphorescence juxtaposition quintessential "
    "obfuscation perspicacious grandiloquent sesquipedalian rehabilitation "
    "transcendental paleontologist bureaucratization bioluminescence "
    "substantiation hieroglyphics"
).split()

# words kept out of the training split so evaluation sees unseen targets
HELDOUT_SIMPLE = ("river", "mountain", "flower")
HELDOUT_COMPLEX = (
    "bioluminescence", "substantiation", "hieroglyphics", "perspicacious"
)


def _embedding_vocab() -> dict[str, str]:
    vocab: dict[str, str] = {}
    for topic, words in _TOPIC_WORDS.items():
        for word in words.split():
            vocab.setdefault(word, topic)
    # half the complex vocabulary is embedded, the other half stays OOV
    for i, word in enumerate(COMPLEX_WORDS):
        if i % 2 == 0:
            vocab.setdefault(word, "abstract")
    return vocab


def _format_vec(word: str, values: np.ndarray) -> str:
    return word + " " + " ".join(f"{v:.4f}" for v in values)


def _context_vectors(rng: np.random.Generator) -> list[str]:
    vocab = _embedding_vocab()
    lines = []
    for word in sorted(vocab):
        base = np.array(_TOPIC_BASES[vocab[word]])
        lines.append(_format_vec(word, base + rng.normal(0.0, 0.25, 8)))
    return lines


def _grid_vectors(rng: np.random.Generator) -> list[str]:
    vocab = _embedding_vocab()
    complex_set = set(COMPLEX_WORDS)
    lines = []
    for word in sorted(vocab):
        if word in complex_set:
            base = np.array([0.0, 2.0, 0.3, 0.0, 0.0, 0.4])
        else:
            base = np.array([2.0, 0.0, 0.0, 0.3, 0.4, 0.0])
        lines.append(_format_vec(word, base + rng.normal(0.0, 0.4, 6)))
    return lines


# --------------------------------------------------------------------------
# corpus

_SKELETONS = (
    "the {A} {N1} did {V} near the {N2} while the {N3} stood in the rain",
    "a {N1} and a {N2} did {V} by the {A} {N3} before night came",
    "people saw the {A} {N1} {V} from the {N2} to the {N3} at day",
    "{N1} was the {A} word the naïve friend wrote about the {N2}",
    "every {N1} in the café had a {A} {N2} and some {N3} to eat",
    "the {N1} will {V} when the {A} {N2} falls on the {N3}",
)

_VERB_POOL = "run walk eat see give talk sing swim sleep drink move".split()
_ADJ_POOL = "big small good bad fast slow warm cold open little large".split()


@dataclass
class _Row:
    id: str
    sentence: str
    start: int
    end: int
    target: str
    k_native: int
    k_nonnative: int

    def render(self) -> str:
        total = self.k_native + self.k_nonnative
        prob = total / (ANNOTATORS_NATIVE + ANNOTATORS_NONNATIVE)
        return "\t".join([
            self.id, self.sentence, str(self.start), str(self.end),
            self.target, str(ANNOTATORS_NATIVE), str(ANNOTATORS_NONNATIVE),
            str(self.k_native), str(self.k_nonnative),
            "1" if total >= 1 else "0", f"{prob:.2f}",
        ])


def _annotate(rng: np.random.Generator, words: list[str]) -> tuple[int, int]:
    is_complex = any(w in set(COMPLEX_WORDS) for w in words)
    if is_complex:
        longest = max(len(w) for w in words)
        p_non = min(0.45 + 0.02 * max(longest - 10, 0), 0.9)
        p_nat = 0.45 * p_non
    else:
        p_non = 0.005
        p_nat = 0.002
    return (
        int(rng.binomial(ANNOTATORS_NATIVE, p_nat)),
        int(rng.binomial(ANNOTATORS_NONNATIVE, p_non)),
    )


def _build_sentence(
    rng: np.random.Generator, target_words: list[str]
) -> tuple[str, int, int, str]:
    """Assemble a sentence containing the target tokens adjacently and
    return (sentence, byte start, byte end, target string)."""
    skeleton = _SKELETONS[rng.integers(len(_SKELETONS))].split()
    nouns = [w for w in SIMPLE_WORDS if w not in _VERB_POOL + _ADJ_POOL]
    tokens: list[str] = []
    slots: list[int] = []  # positions eligible to hold the target
    for part in skeleton:
        if part == "{A}":
            tokens.append(str(rng.choice(_ADJ_POOL)))
            slots.append(len(tokens) - 1)
        elif part in ("{N1}", "{N2}", "{N3}"):
            tokens.append(str(rng.choice(nouns)))
            slots.append(len(tokens) - 1)
        elif part == "{V}":
            tokens.append(str(rng.choice(_VERB_POOL)))
            slots.append(len(tokens) - 1)
        else:
            tokens.append(part)
    slot = int(slots[rng.integers(len(slots))])
    tokens[slot:slot + 1] = target_words
    last = slot + len(target_words) - 1
    if rng.random() < 0.3:
        victim = int(rng.integers(len(tokens)))
        if not slot <= victim <= last:
            tokens[victim] += ","
    if last != len(tokens) - 1 and rng.random() < 0.6:
        tokens[-1] += "."
    starts = []
    pos = 0
    for token in tokens:
        starts.append(pos)
        pos += len(token.encode("utf-8")) + 1
    sentence = " ".join(tokens)
    start = starts[slot]
    target = " ".join(target_words)
    end = start + len(target.encode("utf-8"))
    assert sentence.encode("utf-8")[start:end].decode("utf-8") == target
    return sentence, start, end, target


def _make_split(
    rng: np.random.Generator, prefix: str, count: int, heldout: bool
) -> list[str]:
    simple_pool = [w for w in SIMPLE_WORDS if w not in HELDOUT_SIMPLE]
    complex_pool = [w for w in COMPLEX_WORDS if w not in HELDOUT_COMPLEX]
    rows = []
    for i in range(count):
        draw = rng.random()
        if heldout and i % 4 == 0:
            pool = list(HELDOUT_COMPLEX if draw < 0.45 else HELDOUT_SIMPLE)
        else:
            pool = complex_pool if draw < 0.45 else simple_pool
        words = [str(rng.choice(pool))]
        if rng.random() < 0.12:
            second = simple_pool if rng.random() < 0.7 else complex_pool
            words.append(str(rng.choice(second)))
        sentence, start, end, target = _build_sentence(rng, words)
        k_nat, k_non = _annotate(rng, words)
        rows.append(_Row(
            id=f"{prefix}{i + 1:04d}",
            sentence=sentence, start=start, end=end, target=target,
            k_native=k_nat, k_nonnative=k_non,
        ).render())
    return rows


# --------------------------------------------------------------------------
# entry point


def write_all(out_dir: str | Path, seed: int = SEED) -> None:
    """Write the complete synthetic fixture under ``out_dir``."""
    out = Path(out_dir)
    (out / "wordnet").mkdir(parents=True, exist_ok=True)
    for name, content in _layout_wordnet().items():
        (out / "wordnet" / name).write_text(content, encoding="utf-8")
    rng = np.random.default_rng(seed)
    (out / "context.vec").write_text(
        "\n".join(_context_vectors(rng)) + "\n", encoding="utf-8")
    (out / "grid.vec").write_text(
        "\n".join(_grid_vectors(rng)) + "\n", encoding="utf-8")
    for name, count, heldout in (
        ("train", 200, False), ("valid", 60, True), ("test", 60, True)
    ):
        rows = _make_split(rng, f"SYN{name[:2].upper()}", count, heldout)
        (out / f"{name}.tsv").write_text(
            "\n".join(rows) + "\n", encoding="utf-8")


if __name__ == "__main__":
    import sys

    write_all(sys.argv[1] if len(sys.argv) > 1 else "synthetic-out")
