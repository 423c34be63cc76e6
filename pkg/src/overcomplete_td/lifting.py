"""Implicit rank-n representation of the lifted operator.

Block (subspace) power iteration with QR re-orthonormalization and a final
Rayleigh-Ritz step. The lifted operator is indefinite, so the iteration runs
on ``A + shift*I`` with a shift large enough to push the negative part of the
spectrum below the wanted top eigenvalues; Ritz values are reported for
``A`` itself, largest first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import io as binio
from .linalg import MatMat, extreme_eigenvalue, orthonormalize
from .netcontract import LiftedOperator, NonFiniteError
from .seeding import stream
from .tensor_core import as_tensor3


class SubspaceCollapseError(ArithmeticError):
    """All Ritz values vanished: the operator is (numerically) zero on the block."""


@dataclass(frozen=True)
class ImplicitRank:
    """``U V^T`` with ``V = U diag(eigvals)``; ``U`` has orthonormal columns."""

    U: np.ndarray = field(repr=False)
    eigvals: np.ndarray
    next_eigval: float | None = None
    converged: bool = True
    max_residual: float = 0.0
    iterations: int = 0
    shift: float = 0.0
    ritz_history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def V(self) -> np.ndarray:
        return self.U * self.eigvals

    @property
    def k(self) -> int:
        return self.U.shape[1]

    @property
    def dim(self) -> int:
        return self.U.shape[0]

    @property
    def gap_ratio(self) -> float | None:
        """``lambda_{k+1} / lambda_k`` when the extra Ritz value is known."""
        if self.next_eigval is None or self.k == 0 or self.eigvals[-1] == 0:
            return None
        return float(self.next_eigval / self.eigvals[-1])

    def matmat(self, X: np.ndarray) -> np.ndarray:
        return self.U @ (self.V.T @ X)

    def dense(self) -> np.ndarray:
        return self.U @ self.V.T

    def frobenius_distance_to(self, W: np.ndarray) -> float:
        """``||U V^T - W W^T||_F`` computed from factors only."""
        return factor_distance(self.U, self.V, W, W)

    def save(self, path) -> None:
        binio.write_eig(path, self.U, self.eigvals)


def factor_distance(U, V, P, Q) -> float:
    """``||U V^T - P Q^T||_F`` without forming either product."""
    uu = np.sum((U.T @ U) * (V.T @ V))
    pp = np.sum((P.T @ P) * (Q.T @ Q))
    up = np.sum((U.T @ P) * (V.T @ Q))
    return float(np.sqrt(max(0.0, uu + pp - 2.0 * up)))


def top_k_eigenpairs(apply: MatMat, dim: int, k: int, *, iters: int = 100,
                     tol: float = 1e-8, rng: np.random.Generator | None = None,
                     extra: int = 1, shift: float = 0.0) -> ImplicitRank:
    """Top-``k`` eigenpairs of a symmetric operator given as a block map.

    ``extra`` additional columns are carried to expose ``lambda_{k+1}``.
    Stops once every wanted Ritz pair has residual ``<= tol * |lambda_1|``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > dim:
        raise ValueError(f"k={k} exceeds the operator dimension {dim}")
    rng = rng if rng is not None else np.random.default_rng(0)
    block = min(dim, k + max(0, extra))
    X = orthonormalize(rng.standard_normal((dim, block)))
    history = []
    converged = False
    worst = np.inf
    it = 0
    while True:
        Y = apply(X)
        if not np.all(np.isfinite(Y)):
            raise NonFiniteError("operator returned non-finite values")
        H = X.T @ Y
        H = 0.5 * (H + H.T)
        theta, S = np.linalg.eigh(H)
        order = np.argsort(theta)[::-1]
        theta, S = theta[order], S[:, order]
        if np.all(np.abs(theta) < 1e-14):
            raise SubspaceCollapseError("all Ritz values are below 1e-14")
        history.append(float(theta[0]))
        ritz = X @ S
        resid = np.linalg.norm(Y @ S - ritz * theta, axis=0)
        scale = max(abs(theta[0]), np.abs(theta).max())
        worst = float(resid[:k].max())
        if worst <= tol * scale:
            converged = True
            break
        if it >= iters:
            break
        X = orthonormalize(Y + shift * X)
        it += 1
    nxt = float(theta[k]) if block > k else None
    return ImplicitRank(
        U=ritz[:, :k].copy(),
        eigvals=theta[:k].copy(),
        next_eigval=nxt,
        converged=converged,
        max_residual=worst,
        iterations=it,
        shift=shift,
        ritz_history=tuple(history),
    )


@dataclass
class LiftConfig:
    iters: int | None = None  # default 30 * ceil(log2 d)
    tol: float = 1e-8
    extra: int = 1
    shift: float | str = "auto"
    seed: int = 0

    def resolved_iters(self, d: int) -> int:
        if self.iters is not None:
            return self.iters
        return 30 * max(1, math.ceil(math.log2(d)))


def choose_shift(apply: MatMat, dim: int, rng: np.random.Generator) -> float:
    """Shift that lifts the most negative eigenvalue to roughly zero."""
    lo = extreme_eigenvalue(apply, dim, rng, lowest=True)
    return 1.1 * max(0.0, -lo)


def lift(T, n: int, cfg: LiftConfig | None = None, op: LiftedOperator | None = None) -> ImplicitRank:
    """Rank-``n`` implicit approximation of the lifted operator of ``T``."""
    cfg = cfg or LiftConfig()
    T = as_tensor3(T)
    if n < 1:
        raise ValueError("n must be at least 1")
    op = op or LiftedOperator(T)
    if n > op.dim:
        raise ValueError(f"n={n} exceeds d^3={op.dim}")
    if cfg.shift == "auto":
        shift = choose_shift(op, op.dim, stream(cfg.seed, "lift-shift"))
    else:
        shift = float(cfg.shift)
    return top_k_eigenpairs(
        op, op.dim, n,
        iters=cfg.resolved_iters(T.d), tol=cfg.tol,
        rng=stream(cfg.seed, "lift-init"), extra=cfg.extra, shift=shift,
    )
