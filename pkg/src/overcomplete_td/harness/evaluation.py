"""Greedy matching of estimated components to ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..tensor_core import DimensionError, as_components


@dataclass
class MatchReport:
    permutation: list[int]  # truth index -> estimate index, -1 when unmatched
    correlations: np.ndarray
    errors: np.ndarray
    unmatched_truth: list[int]
    unmatched_estimate: list[int]
    d: int

    @property
    def matched(self) -> np.ndarray:
        return np.array([p >= 0 for p in self.permutation], dtype=bool)

    @property
    def complete(self) -> bool:
        return not self.unmatched_truth

    @property
    def max_error(self) -> float:
        m = self.matched
        return float(self.errors[m].max()) if m.any() else float("nan")

    @property
    def min_correlation(self) -> float:
        m = self.matched
        return float(self.correlations[m].min()) if m.any() else float("nan")

    def count_above(self, threshold: float) -> int:
        m = self.matched
        return int(np.sum(self.correlations[m] >= threshold))

    def thresholds(self) -> dict[str, int]:
        return {
            "0.9": self.count_above(0.9),
            "0.99": self.count_above(0.99),
            "1-1/d": self.count_above(1.0 - 1.0 / self.d),
        }

    def to_json(self) -> dict:
        def clean(x):
            return [None if not np.isfinite(v) else float(v) for v in x]

        return {
            "schema_version": 1,
            "permutation": list(map(int, self.permutation)),
            "correlations": clean(self.correlations),
            "errors": clean(self.errors),
            "max_error": None if not np.isfinite(self.max_error) else self.max_error,
            "min_correlation": None if not np.isfinite(self.min_correlation) else self.min_correlation,
            "counts_above": self.thresholds(),
            "unmatched_truth": list(map(int, self.unmatched_truth)),
            "unmatched_estimate": list(map(int, self.unmatched_estimate)),
            "complete": self.complete,
        }


def match_and_score(truth, estimate, flip_signs: bool = False) -> MatchReport:
    """Pair each truth vector with one estimate, largest ``|<a_i, b_j>|`` first.

    Correlations keep the sign of ``<a_i, b_j>`` unless ``flip_signs``.
    """
    A = as_components(truth)
    d = A.shape[1]
    B = np.zeros((0, d)) if estimate is None or len(estimate) == 0 else as_components(estimate)
    if B.shape[1] != d:
        raise DimensionError(f"estimate dimension {B.shape[1]} != truth dimension {d}")
    n, m = A.shape[0], B.shape[0]
    C = A @ B.T
    perm = [-1] * n
    corr = np.full(n, np.nan)
    err = np.full(n, np.nan)
    used_t, used_e = set(), set()
    order = np.argsort(-np.abs(C), axis=None, kind="stable")
    for flat in order:
        i, j = divmod(int(flat), m)
        if i in used_t or j in used_e:
            continue
        used_t.add(i)
        used_e.add(j)
        b = B[j]
        if flip_signs and C[i, j] < 0:
            b = -b
        perm[i] = j
        corr[i] = float(A[i] @ b)
        err[i] = float(np.linalg.norm(A[i] - b))
        if len(used_t) == n or len(used_e) == m:
            break
    return MatchReport(
        permutation=perm,
        correlations=corr,
        errors=err,
        unmatched_truth=[i for i in range(n) if perm[i] < 0],
        unmatched_estimate=[j for j in range(m) if j not in used_e],
        d=d,
    )
