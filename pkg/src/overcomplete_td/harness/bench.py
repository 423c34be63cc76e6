"""Timing grid over (d, n) cells."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import replace

import numpy as np

from ..lifting import lift
from ..netcontract import LiftedOperator
from ..recovery import PHASES, RecoveryConfig, decompose
from ..seeding import child_seed
from ..tensor_core import build_symmetric_tensor
from .evaluation import match_and_score
from .instances import sample_components

CSV_FIELDS = ["d", "n", "seed", "status", "success", "matvecs", "recovered",
              "min_correlation"] + [f"{p}_ms" for p in PHASES] + ["error"]


def parse_grid(text: str) -> list[tuple[int, int]]:
    """``"d=8,16;ratio=1.0,1.5"`` or ``"d=8;n=8,12"`` to a list of ``(d, n)`` cells."""
    parts = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, _, vals = chunk.partition("=")
        parts[key.strip()] = [v.strip() for v in vals.split(",") if v.strip()]
    if "d" not in parts or not parts["d"]:
        raise ValueError("grid needs a d=... entry")
    dims = [int(v) for v in parts["d"]]
    if "n" in parts:
        return [(d, int(n)) for d in dims for n in parts["n"]]
    ratios = [float(v) for v in parts.get("ratio", ["1.0"])]
    return [(d, max(1, int(round(r * d)))) for d in dims for r in ratios]


class _CountingOperator:
    def __init__(self, op: LiftedOperator):
        self.op = op
        self.columns = 0

    def __call__(self, X):
        X = np.asarray(X)
        self.columns += 1 if X.ndim == 1 else X.shape[1]
        return self.op(X)

    def __getattr__(self, name):
        return getattr(self.op, name)


def run_cell(d: int, n: int, seed: int, cfg: RecoveryConfig | None = None) -> dict:
    cfg = replace(cfg or RecoveryConfig(), seed=seed)
    row = {"d": d, "n": n, "seed": seed, "status": "error", "success": False, "matvecs": 0,
           "recovered": 0, "min_correlation": None, "error": ""}
    row.update({f"{p}_ms": None for p in PHASES})
    try:
        A = sample_components(d, n, child_seed(seed, "bench", d, n))
        T = build_symmetric_tensor(A)
        counter = _CountingOperator(LiftedOperator(T))
        t0 = time.perf_counter()
        L = lift(T, n, replace(cfg.lifting, seed=child_seed(seed, "lift")), counter)
        lift_ms = (time.perf_counter() - t0) * 1e3
        res = decompose(T, n, cfg, lifted=L)
        rep = match_and_score(A, res.components)
        row.update({f"{p}_ms": res.timings_ms[p] for p in PHASES})
        row["lift_ms"] = round(lift_ms, 3)
        row["matvecs"] = counter.columns
        row["status"] = res.status
        row["recovered"] = int(res.components.shape[0])
        row["min_correlation"] = rep.min_correlation if rep.matched.any() else None
        row["success"] = bool(rep.complete and rep.count_above(0.99) == n)
    except Exception as exc:  # a failing cell must not stop the grid
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def bench(grid, cfg: RecoveryConfig | None = None, seed: int = 0) -> list[dict]:
    cells = parse_grid(grid) if isinstance(grid, str) else list(grid)
    if not cells:
        raise ValueError("grid is empty")
    return [run_cell(d, n, seed, cfg) for d, n in cells]


def write_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k) for k in CSV_FIELDS})


def write_json(rows: list[dict], path) -> None:
    with open(path, "w") as fh:
        json.dump({"schema_version": 1, "cells": rows}, fh, indent=2, sort_keys=True)
