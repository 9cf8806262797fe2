"""The shipped synthetic fixture and its generator.

Two properties carry the weight: generation is byte-deterministic for a
fixed seed, and the files packaged under ``cwikernel/data/synthetic`` are
exactly what the generator produces, so the shipped corpus can always be
reproduced from source.
"""

import numpy as np
import pytest

from cwikernel import synthetic, synthetic_data_dir
from cwikernel.corpus import parse_dataset
from cwikernel.resources import load_embeddings, load_resources, load_wordnet

FIXTURE_FILES = [
    "context.vec",
    "grid.vec",
    "test.tsv",
    "train.tsv",
    "valid.tsv",
    "wordnet/data.adj",
    "wordnet/data.adv",
    "wordnet/data.noun",
    "wordnet/data.verb",
    "wordnet/index.adj",
    "wordnet/index.adv",
    "wordnet/index.noun",
    "wordnet/index.verb",
]


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    out = tmp_path_factory.mktemp("syn")
    synthetic.write_all(out)
    return out


def test_write_all_is_deterministic(generated, tmp_path):
    synthetic.write_all(tmp_path)
    for name in FIXTURE_FILES:
        assert (tmp_path / name).read_bytes() == (generated / name).read_bytes(), name


def test_shipped_fixture_matches_generator(generated):
    shipped = synthetic_data_dir()
    for name in FIXTURE_FILES:
        assert (shipped / name).read_bytes() == (generated / name).read_bytes(), name


def test_split_sizes_and_ids(generated):
    sizes = {"train": 200, "valid": 60, "test": 60}
    prefixes = {"train": "SYNTR", "valid": "SYNVA", "test": "SYNTE"}
    for split, expected in sizes.items():
        ds = parse_dataset((generated / f"{split}.tsv").read_text().splitlines())
        assert len(ds.instances) == expected
        assert all(i.id.startswith(prefixes[split]) for i in ds.instances)
        ids = [i.id for i in ds.instances]
        assert len(set(ids)) == len(ids)


def test_corpus_is_fully_labeled_and_consistent(generated):
    # parse_dataset validates spans, counts, and label consistency; here we
    # check the label distribution is usable for training
    for split in ("train", "valid", "test"):
        ds = parse_dataset((generated / f"{split}.tsv").read_text().splitlines())
        binary = [i.binary_label for i in ds.instances]
        assert set(binary) == {0, 1}
        for inst in ds.instances:
            assert inst.n_native == 10 and inst.n_nonnative == 10
            # 20 annotators puts every probability on an exact 0.05 step
            scaled = inst.prob_label * 20
            assert scaled == pytest.approx(round(scaled))


def test_corpus_has_multibyte_and_multiword_targets(generated):
    ds = parse_dataset((generated / "train.tsv").read_text().splitlines())
    assert any("café" in i.sentence or "naïve" in i.sentence for i in ds.instances)
    multibyte = [i for i in ds.instances if len(i.sentence.encode()) > len(i.sentence)]
    assert multibyte, "no sentence exercises byte offsets != char offsets"
    assert any(" " in i.target for i in ds.instances), "no multi-word target"


def test_heldout_words_stay_out_of_training(generated):
    train = parse_dataset((generated / "train.tsv").read_text().splitlines())
    eval_words: set[str] = set()
    for split in ("valid", "test"):
        ds = parse_dataset((generated / f"{split}.tsv").read_text().splitlines())
        for inst in ds.instances:
            eval_words.update(inst.target.split())
    heldout = set(synthetic.HELDOUT_SIMPLE) | set(synthetic.HELDOUT_COMPLEX)
    for inst in train.instances:
        assert not (set(inst.target.split()) & heldout)
    assert heldout & eval_words, "held-out words never show up in evaluation"


def test_generated_wordnet_loads_and_links(generated):
    db = load_wordnet(generated / "wordnet")
    # every pointer resolved at load time or load_wordnet would have raised
    assert len(db.synsets) == len(synthetic.TOY_SYNSETS)
    # two noun senses of "bat" (animal and club), distinct glosses
    bats = db.synsets_for("bat")
    noun_bats = [s for s in bats if s.pos == "noun"]
    assert len(noun_bats) == 2
    assert {s.gloss for s in noun_bats} == {
        "an animal with wings that flies in the night",
        "a heavy stick used to hit a ball",
    }
    # satellite adjectives surface as adjectives
    large = [s for s in db.synsets_for("large") if s.pos == "adj"]
    assert len(large) == 1
    # "open" exists as both verb and adjective
    assert set(db.synset_ids("open")) == {"verb", "adj"}
    # cross-POS derivation: the adverb "quickly" points at adjective "fast"
    quickly = db.synsets_for("quickly")[0]
    targets = [t for rel in quickly.relations.values() for t in rel]
    assert any(db.synsets[t].pos == "adj" for t in targets)


def test_generated_embeddings_load(generated):
    context = load_embeddings(
        (generated / "context.vec").read_text().splitlines()
    )
    grid = load_embeddings((generated / "grid.vec").read_text().splitlines())
    assert context.dim == 8
    assert grid.dim == 6
    assert "cat" in context and "cat" in grid
    # alternating complex words are embedded / held out-of-vocabulary
    assert synthetic.COMPLEX_WORDS[0] in context
    assert synthetic.COMPLEX_WORDS[1] not in context
    vec = context.vectors["cat"]
    assert np.all(np.isfinite(vec))


def test_bundle_loads_from_shipped_directory():
    shipped = synthetic_data_dir()
    bundle = load_resources(
        shipped / "wordnet", shipped / "context.vec", shipped / "grid.vec"
    )
    assert bundle.context_embeddings.dim == 8
    assert bundle.grid_embeddings.dim == 6
    assert bundle.wordnet.synsets_for("cat")


def test_complex_simple_annotation_gap(generated):
    """Complex targets should attract clearly more annotations."""
    ds = parse_dataset((generated / "train.tsv").read_text().splitlines())
    complex_set = set(synthetic.COMPLEX_WORDS)
    probs_complex = [
        i.prob_label for i in ds.instances if set(i.target.split()) & complex_set
    ]
    probs_simple = [
        i.prob_label for i in ds.instances if not set(i.target.split()) & complex_set
    ]
    assert probs_complex and probs_simple
    assert np.mean(probs_complex) > np.mean(probs_simple) + 0.2
