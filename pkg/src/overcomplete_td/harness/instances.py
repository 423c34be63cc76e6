"""Random and structured component sets."""

from __future__ import annotations

import numpy as np

from ..seeding import stream


def sample_components(d: int, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. uniform unit vectors in R^d as an ``(n, d)`` array."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if n < 1:
        raise ValueError("n must be at least 1")
    G = stream(seed, "components", d, n).standard_normal((n, d))
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def orthonormal_components(d: int, n: int | None = None, seed: int | None = None) -> np.ndarray:
    """First ``n`` rows of the identity, or of a random orthogonal matrix when ``seed`` is given."""
    n = d if n is None else n
    if not 1 <= n <= d:
        raise ValueError("need 1 <= n <= d")
    if seed is None:
        return np.eye(d)[:n]
    Q, R = np.linalg.qr(stream(seed, "orthonormal", d).standard_normal((d, d)))
    Q *= np.sign(np.diag(R))
    return Q.T[:n].copy()
