"""Spectral-norm clipping of the two rectangular flattenings of a lift.

A rank-k lift ``U V^T`` (rows ``(r0,r1,r2)``, columns ``(c0,c1,c2)``) is a
sixth-order tensor with super-modes {1,2} = (r0,c0), {3,4} = (r1,r2) and
{5,6} = (c1,c2). Flattening A = {1,2,3,4}{5,6} puts the (c1,c2) part of V
alone on the column side, so clipping it only rewrites V; flattening B =
{1,2,5,6}{3,4} does the same for U. Neither step changes the rank.

For flattening A, with ``Z[(r,c0),(c1,c2)] = V[(c0,c1,c2), r]``,

    N^T N = W = Z^T (U^T U (x) I_d) Z,

and the nearest point with spectral norm at most one is ``N (I - H)`` where
``H = sum_{mu > 1} (1 - mu^{-1/2}) p p^T`` over the eigenpairs of ``W``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .netcontract import FLAT_A, FLAT_B, LIFT_FLATTENING, NonFiniteError
from .tensor_core import DimensionError, flatten, unflatten

FLATTENINGS = {"A": FLAT_A, "B": FLAT_B}

# eigenvalues of W in (1, 1 + _EIG_SLACK] are left alone
_EIG_SLACK = 1e-10
NORM_TOL = 1e-6
ABORT_TOL = 1e-3


class TruncationError(RuntimeError):
    """The second clip pushed the first flattening far above norm one."""


@dataclass(frozen=True)
class TruncatedLift:
    U: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    applied: tuple[str, ...] = ()
    norms: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.U.shape[1]

    @property
    def d(self) -> int:
        return _cube_root(self.U.shape[0])

    def dense(self) -> np.ndarray:
        return self.U @ self.V.T


def _cube_root(m: int) -> int:
    d = round(m ** (1.0 / 3.0))
    if d ** 3 != m:
        raise DimensionError(f"factor height {m} is not a cube")
    return d


def _factors(L) -> tuple[np.ndarray, np.ndarray]:
    U = np.asarray(L.U, dtype=np.float64)
    V = np.asarray(L.V, dtype=np.float64)
    if U.shape != V.shape or U.ndim != 2:
        raise DimensionError(f"factor shapes {U.shape} and {V.shape} differ")
    if not (np.all(np.isfinite(U)) and np.all(np.isfinite(V))):
        raise NonFiniteError("lift factors contain non-finite values")
    return U, V


def _sides(U, V, which: str):
    """(kept, clipped) factors: flattening B is A with the roles of U and V swapped."""
    if which == "A":
        return U, V
    if which == "B":
        return V, U
    raise ValueError(f"unknown flattening {which!r}; expected 'A' or 'B'")


def _z(F: np.ndarray, d: int) -> np.ndarray:
    # Z[(r, x0), (x1, x2)] = F[(x0, x1, x2), r]
    k = F.shape[1]
    return F.T.reshape(k * d, d * d)


def _unz(Z: np.ndarray, d: int) -> np.ndarray:
    k = Z.shape[0] // d
    return Z.reshape(k, d ** 3).T


def _gram(kept: np.ndarray, Z: np.ndarray, d: int) -> np.ndarray:
    k = kept.shape[1]
    K = kept.T @ kept
    # (K (x) I_d) Z without forming the Kronecker product
    KZ = (K @ Z.reshape(k, d * d * d)).reshape(k * d, d * d)
    W = Z.T @ KZ
    return 0.5 * (W + W.T)


def rect_gram(L, which: str) -> np.ndarray:
    """``N^T N`` for the d^4 x d^2 flattening ``which`` of ``L.U @ L.V.T``."""
    U, V = _factors(L)
    d = _cube_root(U.shape[0])
    kept, clipped = _sides(U, V, which)
    return _gram(kept, _z(clipped, d), d)


def rect_norm(L, which: str) -> float:
    """Spectral norm of a rectangular flattening, from the eigenvalues of its Gram matrix."""
    mu = np.linalg.eigvalsh(rect_gram(L, which))
    return float(np.sqrt(max(mu[-1], 0.0)))


def clip_flattening(L, which: str) -> TruncatedLift:
    """Project flattening ``which`` onto the spectral-norm unit ball."""
    U, V = _factors(L)
    d = _cube_root(U.shape[0])
    kept, clipped = _sides(U, V, which)
    Z = _z(clipped, d)
    mu, P = np.linalg.eigh(_gram(kept, Z, d))
    big = mu > 1.0 + _EIG_SLACK
    applied = tuple(getattr(L, "applied", ()))
    norms = dict(getattr(L, "norms", {}))
    norms[f"{which}_before"] = float(np.sqrt(max(mu[-1], 0.0)))
    if np.any(big):
        Pb = P[:, big]
        H = (Pb * (1.0 - mu[big] ** -0.5)) @ Pb.T
        clipped = _unz(Z - Z @ H, d)
        applied = applied + (which,)
    else:
        clipped = clipped.copy()
    newU, newV = (kept.copy(), clipped) if which == "A" else (clipped, kept.copy())
    out = TruncatedLift(newU, newV, applied, norms)
    norms[f"{which}_after"] = rect_norm(out, which)
    return out


def truncate_both(L) -> TruncatedLift:
    """Clip flattening A, then B, and check that B left A inside the ball."""
    first = clip_flattening(L, "A")
    second = clip_flattening(first, "B")
    a_after = rect_norm(second, "A")
    second.norms["A_after"] = a_after
    if a_after > 1.0 + ABORT_TOL:
        raise TruncationError(
            f"flattening A has norm {a_after:.6g} after clipping B; "
            "the two clips should commute on the column side"
        )
    return second


# --- dense references (small d only) ---------------------------------------

def to_sixth_order(matrix: np.ndarray, d: int) -> np.ndarray:
    """View a d^3 x d^3 lift as an order-6 array indexed by modes 1..6."""
    return unflatten(np.asarray(matrix), LIFT_FLATTENING, d)


def from_sixth_order(tensor6: np.ndarray) -> np.ndarray:
    return flatten(tensor6, LIFT_FLATTENING)


def dense_flattening(matrix: np.ndarray, d: int, which: str) -> np.ndarray:
    return flatten(to_sixth_order(matrix, d), FLATTENINGS[which])


def dense_clip(matrix: np.ndarray, d: int, which: str) -> np.ndarray:
    """SVD, clip singular values at one, reassemble, and return the lift matrix."""
    spec = FLATTENINGS[which]
    N = flatten(to_sixth_order(matrix, d), spec)
    Q, s, Rt = np.linalg.svd(N, full_matrices=False)
    N1 = (Q * np.minimum(s, 1.0)) @ Rt
    return from_sixth_order(unflatten(N1, spec, d))
