"""Parsing and validation of CWI shared-task TSV datasets.

File format (no header row, UTF-8, LF or CRLF): one instance per line with
tab-separated columns

    id  sentence  start  end  target  n_native  n_nonnative
    k_native  k_nonnative  binary  prob

``start``/``end`` are BYTE offsets into the UTF-8 encoding of the sentence,
half-open, as distributed in the shared-task files; sentences in the News
genre contain multi-byte characters, so byte and character offsets differ
there.  Unlabeled files may omit trailing columns: 9 columns drop the two
gold labels, 5 columns drop the annotator counts as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Literal

import numpy as np

from .errors import DataError

N_COLUMNS_FULL = 11
N_COLUMNS_NO_LABELS = 9
N_COLUMNS_BARE = 5

Genre = Literal["News", "WikiNews", "Wikipedia"]
Split = Literal["train", "validation", "test"]

# |file prob - k_total/n_total| beyond this is treated as corrupt data
PROB_LABEL_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Instance:
    """One annotated target: a span inside a sentence plus its labels.

    ``target_start``/``target_end`` are byte offsets (see module docstring).
    Annotator counts and labels are None when the source file omitted them.
    """

    id: str
    sentence: str
    target_start: int
    target_end: int
    target: str
    n_native: int | None = None
    n_nonnative: int | None = None
    k_native: int | None = None
    k_nonnative: int | None = None
    binary_label: int | None = None
    prob_label: float | None = None

    @property
    def labeled(self) -> bool:
        return self.binary_label is not None and self.prob_label is not None

    def target_char_span(self) -> tuple[int, int]:
        """Translate the byte span into character offsets into ``sentence``."""
        raw = self.sentence.encode("utf-8")
        start = len(raw[: self.target_start].decode("utf-8"))
        end = start + len(raw[self.target_start : self.target_end].decode("utf-8"))
        return start, end


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of instances from one split."""

    instances: tuple[Instance, ...]
    genre: Genre | None = None
    split: Split | None = None

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    @property
    def labeled(self) -> bool:
        return all(inst.labeled for inst in self.instances)


def _parse_int(text: str, what: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError(f"line {lineno}: {what} is not an integer: {text!r}") from None


def _parse_float(text: str, what: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {lineno}: {what} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {lineno}: {what} is not finite: {text!r}")
    return value


def _validate(inst: Instance, lineno: int) -> None:
    raw = inst.sentence.encode("utf-8")
    if not (0 <= inst.target_start < inst.target_end <= len(raw)):
        raise DataError(
            f"line {lineno}: target span [{inst.target_start}, {inst.target_end}) "
            f"outside sentence of {len(raw)} bytes"
        )
    try:
        sliced = raw[inst.target_start : inst.target_end].decode("utf-8")
    except UnicodeDecodeError:
        raise DataError(
            f"line {lineno}: target span [{inst.target_start}, {inst.target_end}) "
            "splits a multi-byte character"
        ) from None
    if sliced != inst.target:
        raise DataError(
            f"line {lineno}: sentence[{inst.target_start}:{inst.target_end}] is "
            f"{sliced!r}, not the stated target {inst.target!r}"
        )
    counts = (inst.n_native, inst.n_nonnative, inst.k_native, inst.k_nonnative)
    if any(c is not None for c in counts):
        if any(c is None or c < 0 for c in counts):
            raise DataError(f"line {lineno}: incomplete or negative annotator counts")
        if inst.k_native > inst.n_native or inst.k_nonnative > inst.n_nonnative:
            raise DataError(f"line {lineno}: complex-mark count exceeds annotator count")
    if inst.binary_label is not None:
        if inst.binary_label not in (0, 1):
            raise DataError(f"line {lineno}: binary label must be 0 or 1")
        if inst.n_native is not None:
            expected = int(inst.k_native + inst.k_nonnative >= 1)
            if inst.binary_label != expected:
                raise DataError(
                    f"line {lineno}: binary label {inst.binary_label} inconsistent "
                    f"with complex-mark counts"
                )
    if inst.prob_label is not None:
        if not 0.0 <= inst.prob_label <= 1.0:
            raise DataError(f"line {lineno}: prob label outside [0, 1]")
        if inst.n_native is not None:
            total = inst.n_native + inst.n_nonnative
            if total > 0:
                expected = (inst.k_native + inst.k_nonnative) / total
                if abs(inst.prob_label - expected) > PROB_LABEL_TOLERANCE:
                    raise DataError(
                        f"line {lineno}: prob label {inst.prob_label} inconsistent "
                        f"with counts (expected {expected:.6f})"
                    )


def parse_dataset(
    lines: Iterable[str],
    has_labels: bool = True,
    genre: Genre | None = None,
    split: Split | None = None,
) -> Dataset:
    """Parse TSV lines into a Dataset, validating every instance invariant.

    ``lines`` may be an open text file or any iterable of strings.  Blank
    lines are ignored.  Raises DataError naming the 1-based line number on
    the first malformed line.
    """
    instances: list[Instance] = []
    seen_ids: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        cols = line.split("\t")
        if has_labels:
            if len(cols) != N_COLUMNS_FULL:
                raise DataError(
                    f"line {lineno}: expected {N_COLUMNS_FULL} columns, got {len(cols)}"
                )
        elif len(cols) not in (N_COLUMNS_FULL, N_COLUMNS_NO_LABELS, N_COLUMNS_BARE):
            raise DataError(
                f"line {lineno}: expected {N_COLUMNS_BARE}, {N_COLUMNS_NO_LABELS} "
                f"or {N_COLUMNS_FULL} columns, got {len(cols)}"
            )
        inst = Instance(
            id=cols[0],
            sentence=cols[1],
            target_start=_parse_int(cols[2], "start offset", lineno),
            target_end=_parse_int(cols[3], "end offset", lineno),
            target=cols[4],
        )
        if len(cols) >= N_COLUMNS_NO_LABELS:
            inst = replace(
                inst,
                n_native=_parse_int(cols[5], "n_native", lineno),
                n_nonnative=_parse_int(cols[6], "n_nonnative", lineno),
                k_native=_parse_int(cols[7], "k_native", lineno),
                k_nonnative=_parse_int(cols[8], "k_nonnative", lineno),
            )
        if len(cols) == N_COLUMNS_FULL:
            inst = replace(
                inst,
                binary_label=_parse_int(cols[9], "binary label", lineno),
                prob_label=_parse_float(cols[10], "prob label", lineno),
            )
        _validate(inst, lineno)
        if inst.id in seen_ids:
            raise DataError(f"line {lineno}: duplicate instance id {inst.id!r}")
        seen_ids.add(inst.id)
        instances.append(inst)
    return Dataset(instances=tuple(instances), genre=genre, split=split)


def serialize_dataset(dataset: Dataset) -> str:
    """Render a Dataset back into its TSV form (inverse of parse_dataset)."""
    out: list[str] = []
    for inst in dataset:
        cols = [
            inst.id,
            inst.sentence,
            str(inst.target_start),
            str(inst.target_end),
            inst.target,
        ]
        if inst.n_native is not None:
            cols += [
                str(inst.n_native),
                str(inst.n_nonnative),
                str(inst.k_native),
                str(inst.k_nonnative),
            ]
        if inst.binary_label is not None:
            cols += [str(inst.binary_label), str(inst.prob_label)]
        out.append("\t".join(cols))
    return "".join(line + "\n" for line in out)


def targets(dataset: Dataset, task: Literal["classify", "regress"]) -> np.ndarray:
    """Gold labels as a vector: {-1, +1} for classify (complex is +1),
    complexity fractions in [0, 1] for regress."""
    if not dataset.labeled:
        raise DataError("unlabeled dataset")
    if task == "classify":
        return np.array(
            [1 if inst.binary_label == 1 else -1 for inst in dataset], dtype=np.float64
        )
    if task == "regress":
        return np.array([inst.prob_label for inst in dataset], dtype=np.float64)
    raise ValueError(f"unknown task {task!r}")
