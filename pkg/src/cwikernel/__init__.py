"""Complex-word identification with kernel methods.

The pipeline: parse an annotated corpus (corpus), load WordNet and
embedding tables (resources), extract lexical and semantic features
(features), build normalized Gram matrices (kernel), train SVM/nu-SVR
models by SMO (learn), tune hyperparameters on a validation split, and
score predictions (metrics).  The cli module wires it all into
featurize/train/tune/predict/evaluate commands; store handles the
deterministic on-disk artifacts.
"""

from importlib.resources import files
from pathlib import Path

__version__ = "0.1.0"


def synthetic_data_dir() -> Path:
    """Directory holding the shipped synthetic corpus, toy WordNet, and toy
    embeddings (train/valid/test.tsv, wordnet/, context.vec, grid.vec)."""
    return Path(str(files("cwikernel").joinpath("data/synthetic")))
