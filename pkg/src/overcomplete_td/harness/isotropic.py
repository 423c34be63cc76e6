"""The whitening map for squared components, kept in closed form.

``R = Pi_sym - c Phi Phi^T`` with ``c = (1 - sqrt(2/(d+2))) / d`` and
``Phi = sum_i e_i (x) e_i``. Applying it to a d^2-vector costs ``O(d^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..linalg import power_norm
from ..tensor_core import DimensionError


@dataclass(frozen=True)
class IsotropicTransform:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")

    @property
    def coeff(self) -> float:
        return (1.0 - math.sqrt(2.0 / (self.d + 2))) / self.d

    @property
    def phi(self) -> np.ndarray:
        return np.eye(self.d).ravel()

    def apply(self, x) -> np.ndarray:
        """``R x`` for a length-d^2 vector or a ``(d^2, k)`` block."""
        x = np.asarray(x, dtype=np.float64)
        d = self.d
        if x.shape[0] != d * d:
            raise DimensionError(f"expected leading dimension {d * d}, got {x.shape[0]}")
        cols = x.reshape(d, d, -1)
        sym = 0.5 * (cols + cols.transpose(1, 0, 2))
        tr = np.einsum("iik->k", cols)
        out = sym.copy()
        idx = np.arange(d)
        out[idx, idx, :] -= self.coeff * tr
        return out.reshape(x.shape)

    __call__ = apply

    def dense(self) -> np.ndarray:
        d = self.d
        P = np.eye(d * d).reshape(d, d, d * d)
        sym = 0.5 * (P + P.transpose(1, 0, 2)).reshape(d * d, d * d)
        return sym - self.coeff * np.outer(self.phi, self.phi)

    def square_residual(self, v) -> float:
        """``||R(v (x) v) - v (x) v||^2``."""
        v = np.asarray(v, dtype=np.float64)
        u = np.kron(v, v)
        return float(np.sum((self.apply(u) - u) ** 2))

    def norm(self, rng: np.random.Generator | None = None, iters: int = 500) -> float:
        rng = rng if rng is not None else np.random.default_rng(0)
        return power_norm(lambda X: self.apply(X), self.d * self.d, rng, iters=iters, tol=1e-14)
