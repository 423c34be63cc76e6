"""Empirical checks of the separation conditions a component set should satisfy.

Every quantity is computed exactly from Gram matrices where possible
(``||sum (a^{(x)t})(a^{(x)t})^T|| = ||G^{o t}||`` for the n x n Gram ``G``),
so nothing of size d^6 is formed. Verdicts compare against the nominal rate
times a ``log(d)^2`` slack and are advisory only.
"""

from __future__ import annotations

import math

import numpy as np

from ..tensor_core import as_components
from .isotropic import IsotropicTransform

CONDITIONS = {
    1: "||sum (a^(x)3)(a^(x)3)^T|| close to 1",
    2: "||sum (a^(x)2)(a^(x)2)^T|| = O~(n/d)",
    3: "||sum a a^T|| = O~(n/d)",
    4: "||sum (R a^(x)2)(R a^(x)2)^T - Pi|| small",
    5: "max_j sum_{i!=j} <R a_i^(x)2, R a_j^(x)2>^2 = O~(n/d^2)",
    6: "max_i ||R a_i^(x)2 - a_i^(x)2||^2 = O~(1/d)",
    7: "max_i | ||a_i|| - 1 | = O~(1/sqrt d)",
    8: "max_{i!=j} <a_i, a_j>^2 = O~(1/d)",
}


def _top_eig(S: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (S + S.T))[-1])


def whitened_squares(A: np.ndarray) -> np.ndarray:
    """Columns ``R (a_i (x) a_i)``, shape ``(d^2, n)``."""
    d = A.shape[1]
    U = np.einsum("ni,nj->ijn", A, A).reshape(d * d, -1)
    return IsotropicTransform(d).apply(U)


def condition_values(components) -> dict[int, float]:
    A = as_components(components)
    n, d = A.shape
    G = A @ A.T
    B = whitened_squares(A)
    BtB = B.T @ B
    off = ~np.eye(n, dtype=bool)
    mu = np.linalg.eigvalsh(0.5 * (BtB + BtB.T))
    nz = mu[mu > 1e-12 * max(1.0, mu.max())]
    sq = np.einsum("ni,nj->ijn", A, A).reshape(d * d, n)
    return {
        1: _top_eig(G ** 3),
        2: _top_eig(G ** 2),
        3: _top_eig(G),
        4: float(np.max(np.abs(nz - 1.0))) if nz.size else 0.0,
        5: float(np.max(np.sum(np.where(off, BtB, 0.0) ** 2, axis=1))),
        6: float(np.max(np.sum((B - sq) ** 2, axis=0))),
        7: float(np.max(np.abs(np.linalg.norm(A, axis=1) - 1.0))),
        8: float(np.max(G[off] ** 2)) if n > 1 else 0.0,
    }


def condition_bounds(n: int, d: int, slack: float | None = None) -> dict[int, float]:
    s = slack if slack is not None else max(1.0, math.log(d)) ** 2
    return {
        1: s * n / d ** 1.5,  # allowed deviation from 1
        2: s * max(1.0, n / d),
        3: s * max(1.0, n / d),
        4: s * n / d ** 1.5,
        5: s * n / d ** 2,
        6: s / d,
        7: s / math.sqrt(d),
        8: s / d,
    }


def diagnostics_nicely_separated(components, n_ambient: int | None = None,
                                 slack: float | None = None) -> dict:
    """Measured value and an advisory pass/warn verdict for each condition."""
    A = as_components(components)
    n, d = A.shape
    n_amb = n if n_ambient is None else n_ambient
    values = condition_values(A)
    bounds = condition_bounds(n_amb, d, slack)
    report = {}
    for c, val in values.items():
        measure = abs(val - 1.0) if c == 1 else val
        report[str(c)] = {
            "description": CONDITIONS[c],
            "value": val,
            "bound": bounds[c],
            "verdict": "pass" if measure <= bounds[c] else "warn",
        }
    return {
        "schema_version": 1,
        "d": d,
        "n": n,
        "n_ambient": n_amb,
        "conditions": report,
        "all_pass": all(v["verdict"] == "pass" for v in report.values()),
    }
