"""Kernel SVM classification and nu-SVR regression over precomputed
normalized Gram matrices, trained by two-variable SMO with
maximal-violating-pair selection.

Classification solves the usual soft-margin dual

    min  1/2 a' Q a - e' a   s.t.  0 <= a_i <= C,  y' a = 0,   Q = yy' o K

and regression the nu-SVR dual over stacked (alpha, alpha*) variables with
the tube width estimated during training.  Both solvers touch only rows of
the kernel matrix, keep their gradients incrementally, and stop when the
largest KKT violation drops below the tolerance; they are deterministic
(ties in pair selection resolve to the lowest index).

Fitted models store the support vectors together with their raw
self-similarities, so predicting never re-featurizes training data: a test
row is kernelized against the supports and normalized with the carried
diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConvergenceError, DataError
from .kernel import KernelConfig, KernelMatrix, normalized_gram

SMO_TOL = 1e-3
SMO_MAX_ITER = 10_000_000
SV_EPS = 1e-12
ETA_FLOOR = 1e-12

Task = Literal["classify", "regress"]


# --------------------------------------------------------------------------
# solvers


@dataclass(frozen=True)
class _DualSolution:
    coefs: np.ndarray  # alpha_i * y_i (SVC) or alpha_i - alpha_i* (SVR)
    bias: float
    epsilon: float  # 0 for SVC
    final_violation: float
    iterations: int


def _masked_extrema(values: np.ndarray, up: np.ndarray, low: np.ndarray):
    m_vals = np.where(up, values, -np.inf)
    i = int(np.argmax(m_vals))
    big_m = np.where(low, values, np.inf)
    j = int(np.argmin(big_m))
    return i, m_vals[i], j, big_m[j]


def _solve_csvc(
    K: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int
) -> _DualSolution:
    n = K.shape[0]
    alpha = np.zeros(n)
    # minus_yG tracks -y_t * dObjective/dalpha_t; at alpha = 0 it equals y.
    minus_yG = y.copy()
    m = big_m = 0.0
    for it in range(max_iter):
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        i, m, j, big_m = _masked_extrema(minus_yG, up, low)
        if m - big_m <= tol:
            break
        eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], ETA_FLOOR)
        delta = (m - big_m) / eta
        delta = min(delta, C - alpha[i] if y[i] > 0 else alpha[i])
        delta = min(delta, alpha[j] if y[j] > 0 else C - alpha[j])
        alpha[i] = min(max(alpha[i] + y[i] * delta, 0.0), C)
        alpha[j] = min(max(alpha[j] - y[j] * delta, 0.0), C)
        minus_yG -= delta * (K[i] - K[j])  # training Gram is symmetric
    else:
        raise ConvergenceError(f"no convergence after {max_iter} SMO iterations")
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        bias = float(minus_yG[free].mean())
    else:
        bias = float((m + big_m) / 2.0)
    return _DualSolution(
        coefs=alpha * y,
        bias=bias,
        epsilon=0.0,
        final_violation=float(m - big_m),
        iterations=it,
    )


def _solve_nusvr(
    K: np.ndarray, z: np.ndarray, C: float, nu: float, tol: float, max_iter: int
) -> _DualSolution:
    n = K.shape[0]
    # Stacked box variables: head = alpha (pushes predictions up), tail =
    # alpha*.  Both class sums start at C*nu*n/2 and stay there because
    # update pairs never cross sides.
    head = np.zeros(n)
    tail = np.zeros(n)
    remaining = C * nu * n / 2.0
    for i in range(n):
        head[i] = tail[i] = min(remaining, C)
        remaining -= head[i]
    v = K @ (head - tail)
    neg_g_head = z - v
    neg_g_tail = v - z
    mh = bh = mt = bt = 0.0
    for it in range(max_iter):
        ih, mh, jh, bh = _masked_extrema(neg_g_head, head < C, head > 0)
        it_, mt, jt, bt = _masked_extrema(neg_g_tail, tail < C, tail > 0)
        viol_head = mh - bh
        viol_tail = mt - bt
        if max(viol_head, viol_tail) <= tol:
            break
        on_head = viol_head >= viol_tail
        side = head if on_head else tail
        i, j, m, big_m = (ih, jh, mh, bh) if on_head else (it_, jt, mt, bt)
        eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], ETA_FLOOR)
        delta = min((m - big_m) / eta, C - side[i], side[j])
        side[i] = min(side[i] + delta, C)
        side[j] = max(side[j] - delta, 0.0)
        dv = delta * (K[i] - K[j])
        if not on_head:
            dv = -dv
        neg_g_head -= dv
        neg_g_tail += dv
    else:
        raise ConvergenceError(f"no convergence after {max_iter} SMO iterations")
    free_head = (head > 0) & (head < C)
    r1 = float(neg_g_head[free_head].mean()) if np.any(free_head) else (mh + bh) / 2.0
    free_tail = (tail > 0) & (tail < C)
    r2 = float(neg_g_tail[free_tail].mean()) if np.any(free_tail) else (mt + bt) / 2.0
    return _DualSolution(
        coefs=head - tail,
        bias=(r1 - r2) / 2.0,
        epsilon=max((r1 + r2) / 2.0, 0.0),
        final_violation=float(max(mh - bh, mt - bt)),
        iterations=it,
    )


# --------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class SvmModel:
    """Dual SVM classifier: support rows, their coefficients alpha_i*y_i,
    bias, and the kernel config.  Support self-similarities for test-time
    normalization are recomputed from the stored rows, so nothing that can
    overflow is persisted."""

    support_vectors: np.ndarray
    support_indices: np.ndarray  # positions in the training set
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelConfig
    C: float
    class_labels: tuple[int, int] = (0, 1)  # dataset labels for -1 / +1


@dataclass(frozen=True)
class SvrModel:
    """Dual nu-SVR: coefficients are alpha_i - alpha_i*; epsilon is the tube
    width estimated during training."""

    support_vectors: np.ndarray
    support_indices: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelConfig
    C: float
    nu: float
    epsilon: float


def _check_training_kernel(K: KernelMatrix) -> None:
    if not K.normalized:
        raise DataError("training kernel matrix is not normalized")
    if K.values.shape[0] != K.values.shape[1]:
        raise DataError("training kernel matrix is not square")


def svc_fit(
    K: KernelMatrix,
    y: np.ndarray,
    C: float,
    vectors: np.ndarray,
    kernel: KernelConfig,
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
) -> SvmModel:
    """Fit a soft-margin SVM on a normalized training Gram.

    ``vectors`` are the (scaled) feature rows the Gram was computed from;
    the model keeps the support rows so it can kernelize unseen samples.
    """
    _check_training_kernel(K)
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise DataError("labels must be -1/+1")
    if np.all(y > 0) or np.all(y < 0):
        raise DataError("training data contains a single class")
    if not C > 0:
        raise DataError("C must be positive")
    sol = _solve_csvc(K.values, y, float(C), tol, max_iter)
    sv = np.flatnonzero(np.abs(sol.coefs) > SV_EPS)
    return SvmModel(
        support_vectors=np.asarray(vectors, dtype=np.float64)[sv].copy(),
        support_indices=sv,
        dual_coefs=sol.coefs[sv].copy(),
        bias=sol.bias,
        kernel=kernel,
        C=float(C),
    )


def nusvr_fit(
    K: KernelMatrix,
    t: np.ndarray,
    C: float,
    nu: float,
    vectors: np.ndarray,
    kernel: KernelConfig,
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
) -> SvrModel:
    """Fit nu-SVR on a normalized training Gram (see svc_fit for the extra
    arguments)."""
    _check_training_kernel(K)
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise DataError("regression targets must be finite")
    if not 0.0 < nu <= 1.0:
        raise DataError("nu must be in (0, 1]")
    if not C > 0:
        raise DataError("C must be positive")
    sol = _solve_nusvr(K.values, t, float(C), float(nu), tol, max_iter)
    sv = np.flatnonzero(np.abs(sol.coefs) > SV_EPS)
    return SvrModel(
        support_vectors=np.asarray(vectors, dtype=np.float64)[sv].copy(),
        support_indices=sv,
        dual_coefs=sol.coefs[sv].copy(),
        bias=sol.bias,
        kernel=kernel,
        C=float(C),
        nu=float(nu),
        epsilon=sol.epsilon,
    )


def _normalized_cross_kernel(
    model: SvmModel | SvrModel, X: np.ndarray
) -> np.ndarray:
    """k-hat(test row, support vector); support self-similarities come from
    the stored rows themselves."""
    return normalized_gram(X, model.support_vectors, model.kernel).values


def decision_values(model: SvmModel | SvrModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        return np.zeros(0)
    return _normalized_cross_kernel(model, X) @ model.dual_coefs + model.bias


def svc_predict(model: SvmModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels in {-1, +1}, raw decision values); sign(0) counts as +1."""
    dec = decision_values(model, X)
    labels = np.where(dec >= 0, 1.0, -1.0)
    return labels, dec


def nusvr_predict(
    model: SvrModel, X: np.ndarray, clamp: bool = False
) -> np.ndarray:
    """Predicted regression values; ``clamp`` clips into [0, 1] for
    deployment use (off by default so error metrics see raw output)."""
    pred = decision_values(model, X)
    if clamp:
        pred = np.clip(pred, 0.0, 1.0)
    return pred


# --------------------------------------------------------------------------
# grid search


@dataclass(frozen=True)
class TuneGrid:
    C_values: tuple[float, ...] = (0.1, 1.0, 10.0, 100.0)
    r_values: tuple[float, ...] = (0.5, 1.0, 1.5, 2.0)
    nu: float = 0.5

    def __post_init__(self) -> None:
        if not self.C_values or (not self.r_values):
            raise ValueError("tuning grid must be nonempty")


@dataclass(frozen=True)
class GridCell:
    C: float
    r: float | None
    score: float | None  # macro F1 (classify) or MAE (regress)
    error: str | None = None


@dataclass(frozen=True)
class GridSearchResult:
    task: Task
    kernel_kind: str
    cells: tuple[GridCell, ...]
    best: GridCell


def _cell_kernels(inner_tt, inner_vt, sq_train, sq_valid, config: KernelConfig):
    """Normalized train/train and valid/train kernel blocks derived from
    precomputed inner products.  RBF exponents are combined before
    exponentiating (see kernel.normalized_gram) so large norms cannot
    overflow."""
    if config.kind == "linear":
        for name, vec in (("train", sq_train), ("validation", sq_valid)):
            bad = np.flatnonzero(vec <= 0)
            if bad.size:
                raise DataError(f"degenerate sample: {name} row {bad[0]}")
        khat_tt = inner_tt / np.sqrt(np.outer(sq_train, sq_train))
        khat_vt = inner_vt / np.sqrt(np.outer(sq_valid, sq_train))
    else:
        # exact exponents are -r/2 squared distances, never positive
        khat_tt = np.exp(np.minimum(
            config.r
            * (inner_tt - 0.5 * sq_train[:, np.newaxis] - 0.5 * sq_train),
            0.0,
        ))
        khat_vt = np.exp(np.minimum(
            config.r
            * (inner_vt - 0.5 * sq_valid[:, np.newaxis] - 0.5 * sq_train),
            0.0,
        ))
    np.fill_diagonal(khat_tt, 1.0)
    return khat_tt, khat_vt


def grid_search(
    train_X: np.ndarray,
    train_y: np.ndarray,
    valid_X: np.ndarray,
    valid_y: np.ndarray,
    task: Task,
    kernel_kind: str,
    grid: TuneGrid = TuneGrid(),
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
) -> GridSearchResult:
    """Sweep (C, r), fitting on the training matrix and scoring on the
    validation matrix: macro F1 (higher wins) for classification, MAE
    (lower wins) for regression.  Ties prefer smaller C, then smaller r;
    a failing cell is recorded and skipped rather than aborting the sweep.

    Inner products are computed once; each RBF cell derives its kernel from
    them elementwise, so the sweep never repeats the big matmul.
    """
    from .metrics import f1_macro, mae  # at call time to avoid cycle at import

    train_X = np.asarray(train_X, dtype=np.float64)
    valid_X = np.asarray(valid_X, dtype=np.float64)
    inner_tt = train_X @ train_X.T
    inner_vt = valid_X @ train_X.T
    sq_train = np.einsum("ij,ij->i", train_X, train_X)
    sq_valid = np.einsum("ij,ij->i", valid_X, valid_X)
    r_axis: tuple[float | None, ...]
    r_axis = grid.r_values if kernel_kind == "rbf" else (None,)
    cells: list[GridCell] = []
    best: GridCell | None = None
    for C in grid.C_values:
        for r in r_axis:
            config = KernelConfig(kind=kernel_kind, r=r)
            try:
                khat_tt, khat_vt = _cell_kernels(
                    inner_tt, inner_vt, sq_train, sq_valid, config
                )
                if task == "classify":
                    sol = _solve_csvc(khat_tt, train_y, float(C), tol, max_iter)
                    dec = khat_vt @ sol.coefs + sol.bias
                    pred = np.where(dec >= 0, 1.0, -1.0)
                    score = f1_macro(pred, valid_y)
                    better = best is None or score > best.score
                else:
                    sol = _solve_nusvr(
                        khat_tt, train_y, float(C), grid.nu, tol, max_iter
                    )
                    pred = khat_vt @ sol.coefs + sol.bias
                    score = mae(pred, valid_y)
                    better = best is None or score < best.score
                cell = GridCell(C=C, r=r, score=float(score))
            except (DataError, ConvergenceError) as exc:
                cells.append(GridCell(C=C, r=r, score=None, error=str(exc)))
                continue
            cells.append(cell)
            if better:
                best = cell
    if best is None:
        raise DataError("every grid cell failed")
    return GridSearchResult(
        task=task, kernel_kind=kernel_kind, cells=tuple(cells), best=best
    )
