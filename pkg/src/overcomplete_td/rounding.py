"""Gaussian rounding of a truncated lift into candidate components."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .netcontract import NonFiniteError
from .seeding import stream
from .tensor_core import DimensionError, Tensor3, as_tensor3, eval3, reshape_vec_to_matrix

GAP_RATIO_MIN = 1.0 + 1e-6
_TIE_TOL = 1e-12


@dataclass
class RoundingConfig:
    """Trial budget and acceptance thresholds. ``trial_budget=None`` means ``C d^2 ceil(log2 d)``."""

    trial_budget: int | None = None
    budget_scale: float = 4.0
    accept_threshold: float = 0.6
    dup_threshold: float = 0.99
    target_fraction: float = 0.99
    svd_iters: int = 100
    svd_tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.accept_threshold < 1.0:
            raise ValueError("accept_threshold must lie in (0, 1)")
        if not 0.0 < self.dup_threshold < 1.0:
            raise ValueError("dup_threshold must lie in (0, 1)")
        if not 0.0 < self.target_fraction <= 1.0:
            raise ValueError("target_fraction must lie in (0, 1]")
        if self.trial_budget is not None and self.trial_budget < 1:
            raise ValueError("trial_budget must be at least 1")
        if self.budget_scale <= 0:
            raise ValueError("budget_scale must be positive")

    def budget(self, d: int) -> int:
        if self.trial_budget is not None:
            return self.trial_budget
        return max(1, int(math.ceil(self.budget_scale * d * d * max(1, math.ceil(math.log2(d))))))


@dataclass
class TrialStats:
    trials: int = 0
    accepted: int = 0
    rejected_score: int = 0
    rejected_gap: int = 0
    rejected_duplicate: int = 0
    unconverged: int = 0

    @property
    def accept_rate(self) -> float:
        return self.accepted / self.trials if self.trials else 0.0

    @property
    def gap_fail_rate(self) -> float:
        return self.rejected_gap / self.trials if self.trials else 0.0

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "accepted": self.accepted,
            "rejected_score": self.rejected_score,
            "rejected_gap": self.rejected_gap,
            "rejected_duplicate": self.rejected_duplicate,
            "unconverged": self.unconverged,
            "accept_rate": self.accept_rate,
            "gap_fail_rate": self.gap_fail_rate,
        }


@dataclass
class CandidateSet:
    vectors: list[np.ndarray] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)
    trial_index: list[int] = field(default_factory=list)
    stats: TrialStats = field(default_factory=TrialStats)
    target: int = 0

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def shortfall(self) -> bool:
        return len(self.vectors) < self.target

    def as_array(self, d: int | None = None) -> np.ndarray:
        if not self.vectors:
            return np.zeros((0, d or 0))
        return np.vstack(self.vectors)


def gaussian_contract(Lt, g) -> np.ndarray:
    """Contract the (r0, c0) super-mode of ``Lt.U @ Lt.V.T`` with ``g``.

    ``g[r0*d + c0]`` weights the slice; the result is indexed by
    ``((r1, r2), (c1, c2))``. Costs ``O(k d^5)``.
    """
    U = np.asarray(Lt.U, dtype=np.float64)
    V = np.asarray(Lt.V, dtype=np.float64)
    m, k = U.shape
    d = round(m ** (1 / 3))
    g = np.asarray(g, dtype=np.float64).ravel()
    if d ** 3 != m or V.shape != U.shape:
        raise DimensionError(f"bad factor shapes {U.shape}, {V.shape}")
    if g.shape != (d * d,):
        raise DimensionError(f"g has length {g.size}, expected {d * d}")
    if not np.all(np.isfinite(g)):
        raise NonFiniteError("g contains non-finite values")
    G = g.reshape(d, d)
    Ur = U.T.reshape(k, d, d * d)
    GV = np.matmul(G, V.T.reshape(k, d, d * d))
    return Ur.reshape(k * d, d * d).T @ GV.reshape(k * d, d * d)


class SingularTriple(NamedTuple):
    vector: np.ndarray
    sigma1: float
    sigma2: float
    converged: bool

    @property
    def gap_ok(self) -> bool:
        if self.sigma2 <= 0.0:
            return True
        return self.sigma1 / self.sigma2 >= GAP_RATIO_MIN


def top_singular_vector(Mg, iters: int = 100, tol: float = 1e-7,
                        rng: np.random.Generator | None = None) -> SingularTriple:
    """Top right singular vector by two-column subspace iteration on ``Mg^T Mg``."""
    Mg = np.asarray(Mg, dtype=np.float64)
    if Mg.ndim != 2:
        raise DimensionError("Mg must be a matrix")
    if not np.all(np.isfinite(Mg)):
        raise NonFiniteError("Mg contains non-finite values")
    if not np.any(Mg):
        raise ValueError("Mg is the zero matrix")
    rng = rng if rng is not None else np.random.default_rng(0)
    n = Mg.shape[1]
    block = min(2, n)
    X, _ = np.linalg.qr(rng.standard_normal((n, block)))
    converged = False
    for _ in range(max(1, iters)):
        Y = Mg.T @ (Mg @ X)
        H = X.T @ Y
        lam, S = np.linalg.eigh(0.5 * (H + H.T))
        lam, S = lam[::-1], S[:, ::-1]
        u = X @ S[:, 0]
        res = np.linalg.norm(Y @ S[:, 0] - lam[0] * u)
        if lam[0] > 0 and res <= tol * lam[0]:
            converged = True
            break
        X, _ = np.linalg.qr(Y)
    u /= np.linalg.norm(u)
    s1 = float(np.linalg.norm(Mg @ u))
    s2 = float(np.sqrt(max(lam[1], 0.0))) if block > 1 else 0.0
    return SingularTriple(u, s1, s2, converged)


def best_candidate(u, T: Tensor3) -> tuple[np.ndarray, float]:
    """Best of ``{+-v_l, +-v_r}`` of the refolded ``u`` by ``<T, b^{(x)3}>``.

    Ties (within 1e-12) go to the lexicographically largest vector.
    """
    T = as_tensor3(T)
    U = reshape_vec_to_matrix(u)
    if U.shape[0] != T.d:
        raise DimensionError(f"u refolds to {U.shape}, tensor has d={T.d}")
    left, _, right_t = np.linalg.svd(U)
    vl, vr = left[:, 0], right_t[0]
    options = [vl, -vl, vr, -vr]
    scores = [eval3(T, b) for b in options]
    best = max(scores)
    tied = [b for b, s in zip(options, scores) if s >= best - _TIE_TOL]
    choice = max(tied, key=lambda b: tuple(np.round(b, 12)))
    return choice / np.linalg.norm(choice), float(best)


def extract_candidate(u, T: Tensor3, accept_threshold: float) -> np.ndarray | None:
    b, score = best_candidate(u, T)
    return b if score >= accept_threshold else None


def rounding_round(Lt, T, n_target: int, cfg: RoundingConfig | None = None,
                   exclude=None, round_index: int = 0) -> CandidateSet:
    """Run Gaussian-rounding trials until ``ceil(target_fraction * n_target)`` novel candidates.

    Trial ``t`` of round ``r`` draws its Gaussian from the stream
    ``(seed, "rounding", r, t)``. Candidates too close (``|<b,b'>| >= dup``)
    to an admitted one or to a vector in ``exclude`` are dropped.
    """
    if n_target < 1:
        raise ValueError("n_target must be at least 1")
    cfg = cfg or RoundingConfig()
    T = as_tensor3(T)
    d = T.d
    want = int(math.ceil(cfg.target_fraction * n_target - 1e-9))
    prior = np.zeros((0, d)) if exclude is None or len(exclude) == 0 else np.atleast_2d(np.asarray(exclude, float))
    out = CandidateSet(target=want)
    stats = out.stats
    for t in range(cfg.budget(d)):
        if len(out) >= want:
            break
        rng = stream(cfg.seed, "rounding", round_index, t)
        g = rng.standard_normal(d * d)
        stats.trials += 1
        Mg = gaussian_contract(Lt, g)
        if not np.any(Mg):
            stats.rejected_gap += 1
            continue
        trip = top_singular_vector(Mg, cfg.svd_iters, cfg.svd_tol, rng)
        if not trip.gap_ok:
            stats.rejected_gap += 1
            continue
        if not trip.converged:
            stats.unconverged += 1
        b, score = best_candidate(trip.vector, T)
        if score < cfg.accept_threshold:
            stats.rejected_score += 1
            continue
        pool = np.vstack([prior] + out.vectors) if (len(prior) or out.vectors) else None
        if pool is not None and np.max(np.abs(pool @ b)) >= cfg.dup_threshold:
            stats.rejected_duplicate += 1
            continue
        out.vectors.append(b)
        out.scores.append(score)
        out.trial_index.append(t)
        stats.accepted += 1
    return out
