"""The outer recovery loop: truncate, round, boost, peel, repeat."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .lifting import ImplicitRank, LiftConfig, lift
from .netcontract import LiftedOperator
from .rounding import RoundingConfig, rounding_round
from .seeding import child_seed
from .tensor_core import DimensionError, as_components, as_tensor3, contract3, eval3, kron_power
from .truncation import truncate_both

PHASES = ("lift", "truncate", "round", "boost", "peel")


class BoostResult(NamedTuple):
    vector: np.ndarray
    stalled: bool


def power_iterate(T, v0, iters: int) -> BoostResult:
    """Tensor power iteration ``v <- T(v, v, .) / ||T(v, v, .)||``."""
    T = as_tensor3(T)
    v = np.asarray(v0, dtype=np.float64).ravel()
    if v.shape != (T.d,):
        raise DimensionError(f"v0 has shape {v.shape}, expected ({T.d},)")
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return BoostResult(v.copy(), True)
    v = v / nv
    for _ in range(iters):
        w = contract3(T, v, v)
        nw = np.linalg.norm(w)
        if nw == 0.0 or not np.isfinite(nw):
            return BoostResult(v, True)
        v = w / nw
    return BoostResult(v, False)


def cube_columns(B) -> np.ndarray:
    """Columns ``b^{(x)3}`` for each row ``b`` of ``B``."""
    B = as_components(B)
    if B.shape[0] == 0:
        return np.zeros((B.shape[1] ** 3, 0))
    return np.stack([kron_power(b, 3) for b in B], axis=1)


def peel(L: ImplicitRank, B, new_rank: int) -> ImplicitRank:
    """Best rank-``new_rank`` approximation of ``U V^T - sum_b (b^{(x)3})(b^{(x)3})^T``.

    The residual's range lies in ``span[U, W_B]``, so a single Rayleigh-Ritz
    step on an orthonormal basis of that span gives its eigenpairs exactly.
    """
    if new_rank < 1:
        raise ValueError("new_rank must be at least 1")
    B = np.zeros((0, round(L.dim ** (1 / 3)))) if B is None or len(B) == 0 else as_components(B)
    W = cube_columns(B) if len(B) else np.zeros((L.dim, 0))
    basis = np.hstack([L.U, W])
    Q, R = np.linalg.qr(basis)
    keep = np.abs(np.diag(R)) > 1e-12 * max(1.0, np.abs(np.diag(R)).max())
    Q = Q[:, keep]
    if new_rank > Q.shape[1]:
        raise ValueError(f"new_rank={new_rank} exceeds the residual rank bound {Q.shape[1]}")
    QU = Q.T @ L.U
    QV = Q.T @ L.V
    QW = Q.T @ W
    S = QU @ QV.T - QW @ QW.T
    lam, P = np.linalg.eigh(0.5 * (S + S.T))
    order = np.argsort(lam)[::-1]
    lam, P = lam[order], P[:, order]
    nxt = float(lam[new_rank]) if lam.size > new_rank else None
    return ImplicitRank(U=Q @ P[:, :new_rank], eigvals=lam[:new_rank].copy(), next_eigval=nxt,
                        converged=True, max_residual=0.0, iterations=1, shift=0.0)


@dataclass
class RecoveryConfig:
    max_outer_rounds: int | None = None  # default ceil(10 log2 n)
    boost_iters: int | None = None  # default ceil(3 log2 d)
    rounding: RoundingConfig = field(default_factory=RoundingConfig)
    lifting: LiftConfig = field(default_factory=LiftConfig)
    peel_policy: str = "actual"
    stall_rounds: int = 2
    seed: int = 0

    def __post_init__(self):
        for name in ("max_outer_rounds", "boost_iters"):
            val = getattr(self, name)
            if val is not None and val < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.stall_rounds < 1:
            raise ValueError("stall_rounds must be at least 1")
        if self.peel_policy not in ("actual", "nominal"):
            raise ValueError("peel_policy must be 'actual' or 'nominal'")

    def rounds_for(self, n: int) -> int:
        if self.max_outer_rounds is not None:
            return self.max_outer_rounds
        return max(1, math.ceil(10 * math.log2(n))) if n > 1 else 1

    def boost_for(self, d: int) -> int:
        if self.boost_iters is not None:
            return self.boost_iters
        return max(1, math.ceil(3 * math.log2(d)))


@dataclass
class RecoveryResult:
    components: np.ndarray
    rounds: list[dict]
    status: str
    d: int
    n: int
    seed: int
    lift_info: dict
    timings_ms: dict

    @property
    def converged(self) -> bool:
        return self.status == "ok"

    def to_json(self, components_ref: str | None = None, include_timings: bool = True) -> dict:
        doc = {
            "schema_version": 1,
            "d": self.d,
            "n": self.n,
            "seed": self.seed,
            "status": self.status,
            "converged": self.converged,
            "recovered": int(self.components.shape[0]),
            "components": components_ref,
            "lift": self.lift_info,
            "rounds": self.rounds,
        }
        if include_timings:
            doc["timings_ms"] = self.timings_ms
        return doc


def _lift_info(L: ImplicitRank) -> dict:
    return {
        "rank": L.k,
        "lambda_1": float(L.eigvals[0]),
        "lambda_n": float(L.eigvals[-1]),
        "lambda_n_plus_1": L.next_eigval,
        "gap_ratio": L.gap_ratio,
        "converged": bool(L.converged),
        "max_residual": float(L.max_residual),
        "iterations": int(L.iterations),
        "shift": float(L.shift),
    }


def decompose(T, n: int, cfg: RecoveryConfig | None = None, lifted: ImplicitRank | None = None) -> RecoveryResult:
    """Recover ``n`` unit vectors ``b`` with ``T ~ sum b^{(x)3}``.

    ``lifted`` may supply a precomputed rank-``n`` lift of ``T``.
    """
    cfg = cfg or RecoveryConfig()
    T = as_tensor3(T)
    d = T.d
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > d ** 3:
        raise ValueError(f"n={n} exceeds d^3={d ** 3}")
    seed = cfg.seed
    lift_cfg = replace(cfg.lifting, seed=child_seed(seed, "lift"))
    round_cfg = replace(cfg.rounding, seed=child_seed(seed, "rounding"))
    tau_dup = round_cfg.dup_threshold
    boost_iters = cfg.boost_for(d)
    timings = {p: 0.0 for p in PHASES}

    t0 = time.perf_counter()
    L = lifted if lifted is not None else lift(T, n, lift_cfg, LiftedOperator(T))
    timings["lift"] += time.perf_counter() - t0
    lift_info = _lift_info(L)

    found: list[np.ndarray] = []
    ledger: list[dict] = []
    remaining = n
    empty_streak = 0
    status = "rounds_exhausted"
    for r in range(cfg.rounds_for(n)):
        entry: dict = {"round": r, "remaining_before": remaining}
        t0 = time.perf_counter()
        Lt = truncate_both(L)
        timings["truncate"] += time.perf_counter() - t0
        entry["truncation_norms"] = dict(sorted(Lt.norms.items()))

        t0 = time.perf_counter()
        cands = rounding_round(Lt, T, remaining, round_cfg, exclude=found, round_index=r)
        timings["round"] += time.perf_counter() - t0
        entry["target"] = cands.target
        entry["candidates"] = len(cands)
        entry["rounding"] = cands.stats.as_dict()

        t0 = time.perf_counter()
        new, scores, stalls, dups = [], [], 0, 0
        for b in cands.vectors:
            boosted = power_iterate(T, b, boost_iters)
            stalls += boosted.stalled
            v = boosted.vector
            pool = found + new
            if pool and np.max(np.abs(np.asarray(pool) @ v)) >= tau_dup:
                dups += 1
                continue
            new.append(v)
            scores.append(eval3(T, v))
        if len(new) > remaining:
            keep = np.argsort(scores, kind="stable")[::-1][:remaining]
            keep.sort()
            new = [new[i] for i in keep]
            scores = [scores[i] for i in keep]
        timings["boost"] += time.perf_counter() - t0
        entry["boost_stalls"] = stalls
        entry["duplicates_after_boost"] = dups
        entry["found"] = len(new)
        entry["scores"] = [float(s) for s in scores]

        found.extend(new)
        remaining -= len(new)
        entry["remaining_after"] = remaining
        empty_streak = empty_streak + 1 if not new else 0

        if remaining == 0:
            entry["peel_rank"] = 0
            ledger.append(entry)
            status = "ok"
            break
        if empty_streak >= cfg.stall_rounds:
            entry["peel_rank"] = L.k
            ledger.append(entry)
            status = "stall"
            break
        if new:
            rank = remaining if cfg.peel_policy == "actual" else max(1, math.ceil(0.01 * n))
            rank = min(rank, L.k)
            t0 = time.perf_counter()
            L = peel(L, np.asarray(new), rank)
            timings["peel"] += time.perf_counter() - t0
        entry["peel_rank"] = L.k
        entry["residual_eigs"] = [float(L.eigvals[0]), float(L.eigvals[-1])]
        ledger.append(entry)

    comps = np.asarray(found) if found else np.zeros((0, d))
    return RecoveryResult(
        components=comps,
        rounds=ledger,
        status=status,
        d=d,
        n=n,
        seed=seed,
        lift_info=lift_info,
        timings_ms={k: round(v * 1e3, 3) for k, v in timings.items()},
    )
