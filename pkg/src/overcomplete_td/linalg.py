"""Small dense/iterative linear-algebra helpers shared by the pipeline."""

from __future__ import annotations

from typing import Callable

import numpy as np

MatMat = Callable[[np.ndarray], np.ndarray]


def orthonormalize(X: np.ndarray) -> np.ndarray:
    """Thin QR with a sign convention (non-negative diagonal of R)."""
    Q, R = np.linalg.qr(X)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def canonical_signs(U: np.ndarray) -> np.ndarray:
    """Flip columns so the entry of largest magnitude in each is positive."""
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def power_norm(apply: MatMat, dim: int, rng: np.random.Generator,
               iters: int = 200, tol: float = 1e-10) -> float:
    """Spectral norm of a symmetric operator by power iteration on ``A^2``.

    Works for indefinite operators: it tracks ``|lambda|_max`` via ``||A x||``.
    """
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = apply(x[:, None])[:, 0]
        y = apply(y[:, None])[:, 0]
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        new = np.sqrt(nrm)
        x = y / nrm
        if abs(new - est) <= tol * new:
            est = new
            break
        est = new
    return float(np.linalg.norm(apply(x[:, None])[:, 0]))


def extreme_eigenvalue(apply: MatMat, dim: int, rng: np.random.Generator,
                       iters: int = 40, lowest: bool = False) -> float:
    """Rough largest (or smallest) eigenvalue of a symmetric operator.

    Power iteration on ``A + s I`` (resp. ``s I - A``) with ``s`` a spectral
    radius estimate; meant for picking shifts, not for accuracy.
    """
    rho = power_norm(apply, dim, rng, iters=iters, tol=1e-4)
    if rho == 0.0:
        return 0.0
    sgn = -1.0 if lowest else 1.0
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    for _ in range(iters):
        y = sgn * apply(x[:, None])[:, 0] + rho * x
        x = y / np.linalg.norm(y)
    return float(x @ apply(x[:, None])[:, 0])


def principal_angle_sin(U: np.ndarray, V: np.ndarray) -> float:
    """Sine of the largest principal angle between two column spaces."""
    Qu = orthonormalize(U)
    Qv = orthonormalize(V)
    # residual form keeps accuracy for tiny angles, unlike sqrt(1 - cos^2)
    return float(np.linalg.norm(Qu - Qv @ (Qv.T @ Qu), 2))
