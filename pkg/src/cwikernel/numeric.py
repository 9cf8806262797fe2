"""Small numeric kernel: cosine similarity, componentwise median, and a
two-component PCA.

The PCA eigendecomposition is a cyclic Jacobi rotation on the sample
covariance (d is at most a few hundred here), so fits are deterministic and
independent of any external eigensolver.  Components follow a fixed sign
convention and a lexicographic tie rule so downstream grid indices are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DataError

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 10_000
EIGENVALUE_TIE_TOL = 1e-12


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; 0 by convention when either vector is
    all zeros."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DataError(f"cosine: length mismatch {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def componentwise_median(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Per-coordinate median; even counts average the two middle values."""
    if len(vectors) == 0:
        raise DataError("no vectors")
    try:
        rows = np.asarray(vectors, dtype=np.float64)
    except ValueError:
        raise DataError("componentwise_median: vectors differ in length") from None
    if rows.ndim != 2:
        raise DataError("componentwise_median: vectors differ in length")
    return np.median(rows, axis=0)


@dataclass(frozen=True)
class PcaModel:
    """Centered 2-component projection: ``mean`` (d,), ``components`` (2, d)
    rows ordered by decreasing explained variance."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray


def _jacobi_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues, eigenvectors-as-columns), unordered.  Convergence
    is off-diagonal Frobenius norm below JACOBI_TOL relative to the matrix
    norm.
    """
    a = np.array(a, dtype=np.float64)
    d = a.shape[0]
    v = np.eye(d)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
        if off <= JACOBI_TOL * scale:
            return np.diag(a).copy(), v
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= JACOBI_TOL * scale / (d * d):
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = 1.0 / (theta - np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    raise ConvergenceError("Jacobi eigendecomposition did not converge")


def _fix_sign(component: np.ndarray) -> np.ndarray:
    """Flip a component so its largest-magnitude coordinate is positive."""
    pivot = int(np.argmax(np.abs(component)))
    return -component if component[pivot] < 0 else component


def pca_fit(rows: np.ndarray, k: int = 2) -> PcaModel:
    """Fit a 2-component PCA on the rows of an n x d matrix.

    Requires n >= 2 and d >= 2; all-equal rows are rejected as degenerate.
    Explained variances use the (n-1)-divisor sample covariance.
    """
    if k != 2:
        raise ValueError("only k=2 is supported")
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise DataError("pca_fit: need at least 2 rows")
    if rows.shape[1] < 2:
        raise DataError("pca_fit: need at least 2 columns")
    if np.all(rows == rows[0]):
        raise DataError("degenerate data")
    mean = rows.mean(axis=0)
    centered = rows - mean
    cov = centered.T @ centered / (rows.shape[0] - 1)
    eigvals, eigvecs = _jacobi_eigh(cov)
    order = np.argsort(-eigvals, kind="stable")[:2]
    variances = eigvals[order]
    components = np.vstack(
        [_fix_sign(eigvecs[:, order[0]]), _fix_sign(eigvecs[:, order[1]])]
    )
    if variances[0] <= 0.0:
        raise DataError("degenerate data")
    if abs(variances[0] - variances[1]) <= EIGENVALUE_TIE_TOL * max(
        1.0, abs(variances[0])
    ) and tuple(components[1]) < tuple(components[0]):
        components = components[::-1].copy()
        variances = variances[::-1].copy()
    for arr in (mean, components, variances):
        arr.flags.writeable = False
    return PcaModel(mean=mean, components=components, explained_variance=variances)


def pca_project(model: PcaModel, v: np.ndarray) -> tuple[float, float]:
    """Project one vector onto the two fitted components."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != model.mean.shape:
        raise DataError(
            f"pca_project: length mismatch {v.shape} vs {model.mean.shape}"
        )
    p = model.components @ (v - model.mean)
    return float(p[0]), float(p[1])
