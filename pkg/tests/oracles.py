"""Independent reference solvers used to cross-check the hand-written code.

Everything here must stay decoupled from the package internals: the QP
oracles go through cvxopt, the brute-force solver enumerates active sets
directly, and the PCA oracle uses numpy's dense eigendecomposition.
"""

from __future__ import annotations

import itertools

import numpy as np
from cvxopt import matrix, solvers

solvers.options["show_progress"] = False

# Tight tolerances so oracle error stays far below the 1e-5 comparison
# budget; the tiny ridge keeps cvxopt's KKT system nonsingular on
# rank-deficient kernels without moving the objective at that scale.
_QP_OPTIONS = {
    "abstol": 1e-10,
    "reltol": 1e-10,
    "feastol": 1e-10,
    "refinement": 2,
    "show_progress": False,
}
_RIDGE = 1e-12


def csvc_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    d = alpha * y
    return 0.5 * float(d @ K @ d) - float(alpha.sum())


def svr_objective(K: np.ndarray, z: np.ndarray, d: np.ndarray) -> float:
    return 0.5 * float(d @ K @ d) - float(z @ d)


def csvc_qp(K: np.ndarray, y: np.ndarray, C: float) -> np.ndarray:
    """Solve the C-SVC dual with cvxopt; returns the alpha vector."""
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K + _RIDGE * np.eye(n)
    P = matrix(Q)
    q = matrix(-np.ones(n))
    G = matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = matrix(np.concatenate([np.zeros(n), np.full(n, C)]))
    A = matrix(y.reshape(1, n))
    b = matrix(np.zeros(1))
    sol = solvers.qp(P, q, G, h, A, b, options=_QP_OPTIONS)
    if sol["status"] not in ("optimal", "unknown"):
        raise RuntimeError(f"cvxopt failed: {sol['status']}")
    return np.array(sol["x"]).ravel()


def csvc_bias_interval(
    K: np.ndarray, y: np.ndarray, alpha: np.ndarray, C: float
) -> tuple[float, float]:
    """The set of primal-optimal biases, via the 1-D hinge problem.

    At any dual optimum the margin vector v = K (alpha*y) is unique, and
    the optimal b is exactly argmin_b C * sum(max(0, 1 - y*(v + b))), a
    convex piecewise-linear function minimized on an interval whose
    endpoints are hinge breakpoints.  This stays well-defined on
    degenerate problems where gradient-based recovery from an inexact
    alpha is unreliable.
    """
    v = K @ (alpha * y)
    candidates = y - v  # b values where some margin constraint is tight
    best = np.inf
    kept: list[float] = []
    for b in np.sort(candidates):
        g = float(np.maximum(0.0, 1.0 - y * (v + b)).sum()) * C
        if g < best - 1e-9 * max(1.0, abs(best)):
            best = g
            kept = [b]
        elif g <= best + 1e-9 * max(1.0, abs(best)):
            kept.append(b)
    return float(min(kept)), float(max(kept))


def csvc_margins(K_cross: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Bias-free decision values of the oracle solution on probe rows."""
    return K_cross @ (alpha * y)


def nusvr_qp(
    K: np.ndarray, z: np.ndarray, C: float, nu: float
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the nu-SVR dual (equality form) with cvxopt.

    Variables are stacked (alpha, alpha_star); returns (alpha, alpha_star).
    """
    n = len(z)
    P_block = np.block([[K, -K], [-K, K]]) + _RIDGE * np.eye(2 * n)
    P = matrix(P_block)
    q = matrix(np.concatenate([-z, z]))
    G = matrix(np.vstack([-np.eye(2 * n), np.eye(2 * n)]))
    h = matrix(np.concatenate([np.zeros(2 * n), np.full(2 * n, C)]))
    A = matrix(
        np.vstack(
            [
                np.concatenate([np.ones(n), -np.ones(n)]),
                np.ones(2 * n),
            ]
        )
    )
    b = matrix(np.array([0.0, C * nu * n]))
    sol = solvers.qp(P, q, G, h, A, b, options=_QP_OPTIONS)
    if sol["status"] not in ("optimal", "unknown"):
        raise RuntimeError(f"cvxopt failed: {sol['status']}")
    beta = np.array(sol["x"]).ravel()
    return beta[:n], beta[n:]


def brute_force_csvc(K: np.ndarray, y: np.ndarray, C: float) -> np.ndarray:
    """Global C-SVC dual optimum by active-set enumeration (n <= 8).

    Every face of the box is tried: each variable is pinned to 0, pinned
    to C, or left free; the free block plus the equality multiplier is
    solved as a linear system.  The convex optimum lies on one of these
    faces, so the best feasible stationary candidate is the true optimum.
    """
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    best_obj = np.inf
    best_alpha = None
    for assignment in itertools.product((0, 1, 2), repeat=n):
        state = np.array(assignment)
        alpha = np.where(state == 1, C, 0.0)
        free = state == 2
        nf = int(free.sum())
        if nf:
            # Stationarity on free vars: Q_FF a_F + mu y_F = 1 - Q_FB a_B,
            # plus the equality y_F . a_F = -y_B . a_B.
            lhs = np.zeros((nf + 1, nf + 1))
            lhs[:nf, :nf] = Q[np.ix_(free, free)]
            lhs[:nf, nf] = y[free]
            lhs[nf, :nf] = y[free]
            rhs = np.zeros(nf + 1)
            rhs[:nf] = 1.0 - Q[np.ix_(free, ~free)] @ alpha[~free]
            rhs[nf] = -float(y[~free] @ alpha[~free])
            sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
            if not np.allclose(lhs @ sol, rhs, atol=1e-8):
                continue
            alpha[free] = sol[:nf]
        if abs(float(y @ alpha)) > 1e-8:
            continue
        if (alpha < -1e-9).any() or (alpha > C + 1e-9).any():
            continue
        obj = csvc_objective(K, y, np.clip(alpha, 0.0, C))
        if obj < best_obj - 1e-12:
            best_obj = obj
            best_alpha = np.clip(alpha, 0.0, C)
    assert best_alpha is not None
    return best_alpha


def brute_force_nusvr(
    K: np.ndarray, z: np.ndarray, C: float, nu: float
) -> tuple[np.ndarray, np.ndarray]:
    """Global nu-SVR dual optimum by active-set enumeration (n <= 4)."""
    n = len(z)
    m = 2 * n
    P = np.block([[K, -K], [-K, K]])
    q = np.concatenate([-z, z])
    A = np.vstack(
        [
            np.concatenate([np.ones(n), -np.ones(n)]),
            np.ones(m),
        ]
    )
    b = np.array([0.0, C * nu * n])
    best_obj = np.inf
    best_beta = None
    for assignment in itertools.product((0, 1, 2), repeat=m):
        state = np.array(assignment)
        beta = np.where(state == 1, C, 0.0)
        free = state == 2
        nf = int(free.sum())
        if nf:
            lhs = np.zeros((nf + 2, nf + 2))
            lhs[:nf, :nf] = P[np.ix_(free, free)]
            lhs[:nf, nf:] = A[:, free].T
            lhs[nf:, :nf] = A[:, free]
            rhs = np.zeros(nf + 2)
            rhs[:nf] = -q[free] - P[np.ix_(free, ~free)] @ beta[~free]
            rhs[nf:] = b - A[:, ~free] @ beta[~free]
            sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
            if not np.allclose(lhs @ sol, rhs, atol=1e-8):
                continue
            beta[free] = sol[:nf]
        if not np.allclose(A @ beta, b, atol=1e-8):
            continue
        if (beta < -1e-9).any() or (beta > C + 1e-9).any():
            continue
        beta = np.clip(beta, 0.0, C)
        d = beta[:n] - beta[n:]
        obj = svr_objective(K, z, d)
        if obj < best_obj - 1e-12:
            best_obj = obj
            best_beta = beta
    assert best_beta is not None
    return best_beta[:n], best_beta[n:]


def pca_reference(X: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """PCA via dense symmetric eigendecomposition.

    Returns (mean, components [k x dim], explained variances), with
    components ordered by decreasing eigenvalue.
    """
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (len(X) - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:k]
    return mean, eigvecs[:, order].T, eigvals[order]
