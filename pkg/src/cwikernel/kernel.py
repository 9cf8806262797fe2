"""Linear and RBF Gram matrices with self-similarity tracking and
diagonal normalization.

The RBF form is an exponential of the inner-product deficit,
``exp(-r * (1 - <x, z>))`` with tunable ``r``; for raw inputs this is not
the classical Gaussian, but after normalization the two coincide
(the normalized value is ``exp(-r/2 * ||x - z||^2)``).  Normalization
divides each entry by the square root of the product of the two
corresponding self-similarities, which makes every sample's
self-similarity exactly 1.

Computation is blocked over rows so an n ~ 14k training Gram does not need
a second n x n temporary; blocks are independent, so ``jobs > 1`` threads
them without changing the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError

DEFAULT_BLOCK_SIZE = 256


@dataclass(frozen=True)
class KernelConfig:
    kind: str  # "linear" | "rbf"
    r: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf":
            if self.r is None or not (self.r > 0):
                raise ValueError("rbf kernel needs r > 0")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "r": self.r}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelConfig":
        return cls(kind=d["kind"], r=d.get("r"))


@dataclass(frozen=True)
class KernelMatrix:
    """Kernel evaluations between two sample sets plus the raw
    self-similarities needed to normalize rectangular test blocks."""

    values: np.ndarray  # (n, m)
    row_self: np.ndarray  # (n,) k(x_i, x_i)
    col_self: np.ndarray  # (m,) k(z_j, z_j)
    normalized: bool = False


def self_similarities(X: np.ndarray, config: KernelConfig) -> np.ndarray:
    """k(x, x) for each row of X under the configured kernel."""
    sq = np.einsum("ij,ij->i", X, X)
    if config.kind == "linear":
        return sq
    return np.exp(-config.r * (1.0 - sq))


def gram(
    X: np.ndarray,
    Z: np.ndarray,
    config: KernelConfig,
    block_size: int = DEFAULT_BLOCK_SIZE,
    jobs: int = 1,
    dtype=np.float64,
) -> KernelMatrix:
    """Kernel matrix K[i, j] = k(X[i], Z[j]) with self-similarity vectors.

    ``dtype`` may be float32 to halve memory on large tuning runs.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    if X.ndim != 2 or Z.ndim != 2 or X.shape[1] != Z.shape[1]:
        raise DataError(
            f"gram: feature dimensions do not match ({X.shape} vs {Z.shape})"
        )
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Z))):
        raise DataError("gram: non-finite feature values")
    n = X.shape[0]
    values = np.empty((n, Z.shape[0]), dtype=dtype)
    starts = range(0, n, block_size)

    def fill(start: int) -> None:
        stop = min(start + block_size, n)
        inner = X[start:stop] @ Z.T
        if config.kind == "rbf":
            inner = np.exp(-config.r * (1.0 - inner))
        values[start:stop] = inner

    if jobs > 1 and n > block_size:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)
    return KernelMatrix(
        values=values,
        row_self=self_similarities(X, config).astype(dtype),
        col_self=self_similarities(Z, config).astype(dtype),
        normalized=False,
    )


def normalize(K: KernelMatrix) -> KernelMatrix:
    """Divide each entry by sqrt(row_self * col_self).

    Idempotent: a normalized matrix has unit self vectors, so normalizing
    again changes nothing.  Raises when any self-similarity is <= 0 (a
    zero feature vector under the linear kernel does this).
    """
    for name, vec in (("row", K.row_self), ("column", K.col_self)):
        bad = np.flatnonzero(vec <= 0)
        if bad.size:
            raise DataError(
                f"degenerate sample: {name} {bad[0]} has self-similarity "
                f"{vec[bad[0]]!r}"
            )
    scale = np.sqrt(np.outer(K.row_self, K.col_self))
    values = (K.values / scale).astype(K.values.dtype)
    return replace(
        K,
        values=values,
        row_self=np.ones_like(K.row_self),
        col_self=np.ones_like(K.col_self),
        normalized=True,
    )


def normalized_gram(
    X: np.ndarray,
    Z: np.ndarray,
    config: KernelConfig,
    block_size: int = DEFAULT_BLOCK_SIZE,
    jobs: int = 1,
    dtype=np.float64,
) -> KernelMatrix:
    """gram followed by normalize, fused for numerical range.

    The raw RBF value exp(-r(1 - <x,z>)) overflows float64 once r times the
    squared norm passes ~700, which unscaled n-gram counts can reach.  The
    normalized entry exp(-r/2 * ||x - z||^2) is always in (0, 1], so this
    combines the exponents before exponentiating and never overflows.
    Agrees with normalize(gram(X, Z, config)) wherever that path stays
    finite.
    """
    self_kernel = Z is X
    X = np.ascontiguousarray(X, dtype=np.float64)
    Z = X if self_kernel else np.ascontiguousarray(Z, dtype=np.float64)
    if X.ndim != 2 or Z.ndim != 2 or X.shape[1] != Z.shape[1]:
        raise DataError(
            f"gram: feature dimensions do not match ({X.shape} vs {Z.shape})"
        )
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Z))):
        raise DataError("gram: non-finite feature values")
    sq_x = np.einsum("ij,ij->i", X, X)
    sq_z = np.einsum("ij,ij->i", Z, Z)
    if config.kind == "linear":
        for name, vec in (("row", sq_x), ("column", sq_z)):
            bad = np.flatnonzero(vec <= 0)
            if bad.size:
                raise DataError(
                    f"degenerate sample: {name} {bad[0]} has self-similarity "
                    f"{vec[bad[0]]!r}"
                )
    n = X.shape[0]
    values = np.empty((n, Z.shape[0]), dtype=dtype)
    starts = range(0, n, block_size)

    def fill(start: int) -> None:
        stop = min(start + block_size, n)
        inner = X[start:stop] @ Z.T
        if config.kind == "rbf":
            exponent = config.r * (
                inner - 0.5 * sq_x[start:stop, np.newaxis] - 0.5 * sq_z
            )
            # the exact exponent is -r/2 ||x - z||^2 <= 0; anything positive
            # is rounding noise, and exponentiating it would push entries
            # past 1
            inner = np.exp(np.minimum(exponent, 0.0))
        else:
            inner = inner / np.sqrt(np.outer(sq_x[start:stop], sq_z))
        values[start:stop] = inner

    if jobs > 1 and n > block_size:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)
    if self_kernel:
        # self-kernel: the normalized diagonal is 1 by definition
        np.fill_diagonal(values, 1.0)
    return KernelMatrix(
        values=values,
        row_self=np.ones(n, dtype=dtype),
        col_self=np.ones(Z.shape[0], dtype=dtype),
        normalized=True,
    )
