"""Simultaneous-diagonalization baseline for the undercomplete case."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..seeding import stream
from ..tensor_core import as_tensor3, kron_power


class JennrichError(ValueError):
    pass


@dataclass
class JennrichResult:
    components: np.ndarray
    weights: np.ndarray
    condition: float
    imag_max: float


def jennrich_oracle(T, n: int, seed: int = 0) -> JennrichResult:
    """Components of ``T = sum w_i v_i^{(x)3}`` for ``n <= d`` generic components.

    ``T(g) T(h)^+`` has the components as eigenvectors; the ``n`` eigenvalues
    largest in magnitude are kept, weights come from least squares against
    ``T`` and signs are flipped so every weight is positive.
    """
    T = as_tensor3(T)
    d = T.d
    if not 1 <= n <= d:
        raise JennrichError(f"need 1 <= n <= d, got n={n}, d={d}")
    rng = stream(seed, "jennrich")
    g, h = rng.standard_normal(d), rng.standard_normal(d)
    Tg = T.data @ g
    Th = T.data @ h
    K = Tg @ np.linalg.pinv(Th, rcond=1e-10)
    lam, vecs = np.linalg.eig(K)
    order = np.argsort(-np.abs(lam), kind="stable")[:n]
    V = vecs[:, order]
    imag = float(np.abs(V.imag).max())
    V = V.real
    V /= np.linalg.norm(V, axis=0)
    cond = float(np.linalg.cond(V))
    basis = np.stack([kron_power(v, 3) for v in V.T], axis=1)
    w, *_ = np.linalg.lstsq(basis, T.data.ravel(), rcond=None)
    signs = np.where(w < 0, -1.0, 1.0)
    return JennrichResult(
        components=(V * signs).T.copy(),
        weights=np.abs(w),
        condition=cond,
        imag_max=imag,
    )
