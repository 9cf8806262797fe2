"""Evaluation metrics for the two tasks: accuracy and macro-averaged F1
over the complex/simple classes, and mean absolute error for probability
regression.

Macro F1 averages the per-class F1 of the positive (complex) and negative
(simple) classes with equal weight.  A class with zero precision+recall
denominator contributes F1 = 0 rather than raising, so degenerate
predictions score poorly instead of crashing an evaluation run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


def _paired(pred, gold) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.float64)
    if pred.shape != gold.shape:
        raise DataError(
            f"prediction/gold length mismatch: {pred.shape} vs {gold.shape}"
        )
    if pred.size == 0:
        raise DataError("cannot score an empty prediction set")
    return pred, gold


def accuracy(pred, gold) -> float:
    pred, gold = _paired(pred, gold)
    return float(np.mean(pred == gold))


def _class_f1(pred: np.ndarray, gold: np.ndarray, label: float) -> float:
    tp = float(np.sum((pred == label) & (gold == label)))
    fp = float(np.sum((pred == label) & (gold != label)))
    fn = float(np.sum((pred != label) & (gold == label)))
    denom = 2.0 * tp + fp + fn
    if denom == 0.0:
        return 0.0
    return 2.0 * tp / denom


def f1_macro(pred, gold) -> float:
    """Unweighted mean of the +1-class and -1-class F1 scores."""
    pred, gold = _paired(pred, gold)
    return (_class_f1(pred, gold, 1.0) + _class_f1(pred, gold, -1.0)) / 2.0


def f1_positive(pred, gold) -> float:
    """F1 of the complex (+1) class alone."""
    pred, gold = _paired(pred, gold)
    return _class_f1(pred, gold, 1.0)


def mae(pred, gold) -> float:
    pred, gold = _paired(pred, gold)
    return float(np.mean(np.abs(pred - gold)))


@dataclass(frozen=True)
class EvalReport:
    """Scores plus the classification confusion counts they derive from.

    For regression only ``mae`` and ``count`` are populated; the confusion
    fields stay None.
    """

    task: str
    count: int
    accuracy: float | None = None
    f1_macro: float | None = None
    f1_positive: float | None = None
    mae: float | None = None
    true_positive: int | None = None
    false_positive: int | None = None
    true_negative: int | None = None
    false_negative: int | None = None

    def as_dict(self) -> dict:
        out: dict = {"task": self.task, "count": self.count}
        for name in (
            "accuracy",
            "f1_macro",
            "f1_positive",
            "mae",
            "true_positive",
            "false_positive",
            "true_negative",
            "false_negative",
        ):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    def render_text(self) -> str:
        lines = [f"task: {self.task}", f"instances: {self.count}"]
        if self.task == "classify":
            lines.append(f"accuracy: {self.accuracy:.4f}")
            lines.append(f"macro F1: {self.f1_macro:.4f}")
            lines.append(f"positive F1: {self.f1_positive:.4f}")
            lines.append(
                "confusion: "
                f"tp={self.true_positive} fp={self.false_positive} "
                f"tn={self.true_negative} fn={self.false_negative}"
            )
        else:
            lines.append(f"MAE: {self.mae:.4f}")
        return "\n".join(lines)

    def render_keyvalues(self) -> str:
        parts = []
        for key, value in self.as_dict().items():
            if isinstance(value, float):
                parts.append(f"{key}={value:.6f}")
            else:
                parts.append(f"{key}={value}")
        return "\n".join(parts)


def classification_report(pred, gold) -> EvalReport:
    pred, gold = _paired(pred, gold)
    return EvalReport(
        task="classify",
        count=int(pred.size),
        accuracy=accuracy(pred, gold),
        f1_macro=f1_macro(pred, gold),
        f1_positive=f1_positive(pred, gold),
        true_positive=int(np.sum((pred == 1.0) & (gold == 1.0))),
        false_positive=int(np.sum((pred == 1.0) & (gold == -1.0))),
        true_negative=int(np.sum((pred == -1.0) & (gold == -1.0))),
        false_negative=int(np.sum((pred == -1.0) & (gold == 1.0))),
    )


def regression_report(pred, gold) -> EvalReport:
    pred, gold = _paired(pred, gold)
    return EvalReport(task="regress", count=int(pred.size), mae=mae(pred, gold))
