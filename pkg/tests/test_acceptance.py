"""Acceptance criteria, each at its stated tolerance.

Every test appends one ``ACCEPTANCE <k> PASS|FAIL`` line that pytest prints
in a dedicated summary section, then asserts.
"""

import json
import math
import os
import time

import numpy as np

from overcomplete_td import io as binio
from overcomplete_td.cli import main as cli_main
from overcomplete_td.harness.evaluation import match_and_score
from overcomplete_td.harness.instances import orthonormal_components, sample_components
from overcomplete_td.harness.isotropic import IsotropicTransform
from overcomplete_td.harness.jennrich import jennrich_oracle
from overcomplete_td.lifting import factor_distance
from overcomplete_td.linalg import power_norm
from overcomplete_td.netcontract import LiftedOperator, dense_quadsum_oracle, lifted_matmat
from overcomplete_td.recovery import RecoveryConfig, decompose, power_iterate
from overcomplete_td.seeding import stream
from overcomplete_td.tensor_core import build_symmetric_tensor
from overcomplete_td.truncation import clip_flattening, dense_clip, dense_flattening, rect_norm, truncate_both

from conftest import cubes, desk_decompose, desk_instance, desk_lift, lowrank_spectral_norm, unit_rows

DESK = (16, 24)


def record(log, k, ok, detail):
    line = f"ACCEPTANCE {k} {'PASS' if ok else 'FAIL'}: {detail}"
    log.append(line)
    print(line)
    assert ok, line


def test_1_operator_oracle_equivalence(acceptance_log):
    t0 = time.perf_counter()
    worst = 0.0
    for d in (3, 4, 5):
        for n in range(1, 7):
            for seed in range(5):
                A = unit_rows(d, n, 1000 * d + 10 * n + seed)
                X = np.random.default_rng(seed).standard_normal((d ** 3, 3))
                ref = dense_quadsum_oracle(A) @ X
                got = lifted_matmat(LiftedOperator(build_symmetric_tensor(A)), X)
                worst = max(worst, np.linalg.norm(got - ref) / np.linalg.norm(ref))
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 1, worst <= 1e-10 and elapsed < 30,
           f"worst relative error {worst:.2e} (<= 1e-10), {elapsed:.1f}s (< 30s)")


def _noise_norm(T, W, seed):
    op = LiftedOperator(T)
    return power_norm(lambda X: op(X) - W @ (W.T @ X), op.dim, np.random.default_rng(seed))


def test_2_rank_n_truncation_bound(acceptance_log):
    d, n = DESK
    t0 = time.perf_counter()
    rows, ok = [], True
    for seed in range(5):
        A, T = desk_instance(d, n, seed)
        L = desk_lift(d, n, seed)
        W = cubes(A)
        E = _noise_norm(T, W, seed)
        fro = factor_distance(L.U, L.V, W, W)
        spec = lowrank_spectral_norm(L.U, L.V, W, W)
        good = fro <= math.sqrt(8 * n) * E * (1 + 1e-3) and spec <= 2 * E * (1 + 1e-3)
        ok &= good
        rows.append(f"s{seed}: |E|={E:.2f} |Ehat|_F={fro:.2f} |Ehat|={spec:.2f}")
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 2, ok and elapsed < 120, "; ".join(rows) + f"; {elapsed:.0f}s")


def test_3_projection_properties(acceptance_log):
    from types import SimpleNamespace

    t0 = time.perf_counter()
    msgs, ok = [], True
    A = unit_rows(3, 2, 4)
    O = 50.0 * dense_quadsum_oracle(A)
    lam, Q = np.linalg.eigh(O)
    L = SimpleNamespace(U=Q[:, -2:], V=Q[:, -2:] * lam[-2:])
    M = L.U @ L.V.T
    once = truncate_both(L)
    motion = np.linalg.norm(truncate_both(once).dense() - once.dense()) / np.linalg.norm(once.dense())
    ok &= motion <= 1e-8
    msgs.append(f"idempotence {motion:.1e}")
    clipA = clip_flattening(L, "A").dense()
    N, Nc = dense_flattening(M, 3, "A"), dense_flattening(clipA, 3, "A")
    rng = np.random.default_rng(0)
    margin = np.inf
    for _ in range(20):
        Y = rng.standard_normal(N.shape)
        Y /= np.linalg.norm(Y, 2) * rng.uniform(1.0, 2.0)
        margin = min(margin, np.linalg.norm(N - Y) + 1e-8 - np.linalg.norm(Nc - Y))
    ok &= margin >= 0
    msgs.append(f"non-expansive margin {margin:.2e}")
    dense_err = max(
        np.linalg.norm(clip_flattening(L, w).dense() - dense_clip(M, 3, w)) / np.linalg.norm(dense_clip(M, 3, w))
        for w in "AB"
    )
    ok &= dense_err <= 1e-8
    msgs.append(f"dense clip rel {dense_err:.1e}")
    worst = 0.0
    for seed in range(5):
        out = truncate_both(desk_lift(*DESK, seed))
        worst = max(worst, rect_norm(out, "A"), rect_norm(out, "B"), out.norms["A_after"])
    ok &= worst <= 1 + 1e-6
    msgs.append(f"desk max rect norm after both clips {worst:.9f}")
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 3, ok and elapsed < 60, ", ".join(msgs) + f", {elapsed:.1f}s")


def test_4_isotropic_identities(acceptance_log):
    t0 = time.perf_counter()
    worst_dev, worst_d = 0.0, None
    norm_dev = 0.0
    rng = np.random.default_rng(0)
    for d in range(2, 33):
        R = IsotropicTransform(d)
        for _ in range(100):
            v = rng.standard_normal(d)
            target = np.linalg.norm(v) ** 4 / (d + 2)
            dev = abs(R.square_residual(v) - target) / target
            if dev > worst_dev:
                worst_dev, worst_d = dev, d
        norm_dev = max(norm_dev, abs(R.norm() - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst_dev <= 1e-12 and norm_dev <= 1e-8 and elapsed < 10
    record(acceptance_log, 4, ok,
           f"max rel deviation of ||R(v(x)v)-v(x)v||^2 from |v|^4/(d+2): {worst_dev:.3f} (d={worst_d}); "
           f"| ||R|| - 1 | = {norm_dev:.1e}; {elapsed:.1f}s")


def test_5_exact_orthonormal_recovery(acceptance_log):
    t0 = time.perf_counter()
    good, worst = 0, 1.0
    for d in (4, 8):
        for seed in range(10):
            Q = orthonormal_components(d, seed=seed)
            res = decompose(build_symmetric_tensor(Q), d, RecoveryConfig(seed=seed))
            rep = match_and_score(Q, res.components)
            c = rep.min_correlation if rep.complete else -1.0
            worst = min(worst, c)
            good += c >= 1 - 1e-6
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 5, good == 20 and elapsed < 60,
           f"{good}/20 instances with all correlations >= 1-1e-6 (worst {worst:.3e}), {elapsed:.1f}s")


def test_6_overcomplete_desk_recovery(acceptance_log):
    d, n = DESK
    t0 = time.perf_counter()
    wins, max_err, counts = 0, 0.0, []
    for seed in range(10):
        A, _ = desk_instance(d, n, seed)
        rep = match_and_score(A, desk_decompose(d, n, seed).components)
        counts.append(rep.count_above(0.99))
        wins += rep.complete and rep.count_above(0.99) == n
        max_err = max(max_err, rep.max_error if rep.complete else 2.0)
    bound = 3 * math.sqrt(n) / d
    detail = (f"{wins}/10 seeds with all {n} >= 0.99 (need 8); per-seed count >= 0.99: {counts}; "
              f"max error {max_err:.2f} vs 3*sqrt(n)/d={bound:.2f}")
    if os.environ.get("OTD_STRETCH") == "1":
        sw = 0
        for seed in range(10):
            A = sample_components(32, 56, seed)
            res = decompose(build_symmetric_tensor(A), 56, RecoveryConfig(seed=seed))
            rep = match_and_score(A, res.components)
            sw += rep.complete and rep.count_above(0.99) == 56
        detail += f"; stretch d=32 n=56: {sw}/10 (not gating)"
    else:
        detail += "; stretch d=32 n=56 skipped (set OTD_STRETCH=1)"
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 6, wins >= 8 and max_err <= bound, detail + f"; {elapsed:.0f}s")


def test_7_boosting(acceptance_log):
    d, n = DESK
    t0 = time.perf_counter()
    thr = 1 - 10 * n / d ** 2
    iters = RecoveryConfig().boost_for(d)
    corr = []
    for trial in range(20):
        A, T = desk_instance(d, n, trial)
        a = A[0]
        w = stream(trial, "warm-start").standard_normal(d)
        w -= (w @ a) * a
        w /= np.linalg.norm(w)
        v0 = 0.99 * a + math.sqrt(1 - 0.99 ** 2) * w
        corr.append(float(power_iterate(T, v0, iters).vector @ a))
    hits = sum(c >= thr for c in corr)
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 7, hits >= 18 and elapsed < 60,
           f"{hits}/20 boosted correlations >= 1-10n/d^2={thr:.4f} (need 18); median {np.median(corr):.3f}, "
           f"min {min(corr):.3f}; {elapsed:.1f}s")


def test_8_jennrich_cross_validation(acceptance_log):
    t0 = time.perf_counter()
    base_ok, match_ok, worst_base, worst_match = 0, 0, 1.0, 1.0
    for seed in range(10):
        A = sample_components(12, 8, seed)
        T = build_symmetric_tensor(A)
        jr = jennrich_oracle(T, 8, seed=seed)
        rb = match_and_score(A, jr.components)
        cb = rb.min_correlation if rb.complete else -1.0
        base_ok += cb >= 1 - 1e-6
        worst_base = min(worst_base, cb)
        rm = match_and_score(jr.components, decompose(T, 8, RecoveryConfig(seed=seed)).components)
        cm = rm.min_correlation if rm.complete else -1.0
        match_ok += cm >= 1 - 1e-3
        worst_match = min(worst_match, cm)
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 8, base_ok == 10 and match_ok == 10 and elapsed < 120,
           f"baseline {base_ok}/10 >= 1-1e-6 (worst {worst_base:.2e}); pipeline matches baseline within 1e-3 "
           f"in {match_ok}/10 (worst correlation {worst_match:.3f}, -1 = incomplete); {elapsed:.0f}s")


def test_9_determinism(acceptance_log, tmp_path):
    A = sample_components(8, 10, 3)
    t = str(tmp_path / "t.t3dx")
    binio.write_tensor(t, build_symmetric_tensor(A))
    reports, comps = [], []
    for k in range(2):
        out, rep = str(tmp_path / f"b{k}.cmpx"), str(tmp_path / f"r{k}.json")
        cli_main(["decompose", "--tensor", t, "--rank", "10", "--seed", "5", "--out", out,
                  "--report", rep, "--no-timings"])
        doc = json.load(open(rep))
        doc["components"] = None
        reports.append(json.dumps(doc, sort_keys=True).encode())
        comps.append(binio.read_components(out))
    same_json = reports[0] == reports[1]
    same_shape = comps[0].shape == comps[1].shape
    diff = float(np.max(np.abs(comps[0] - comps[1]))) if same_shape and comps[0].size else 0.0
    record(acceptance_log, 9, same_json and same_shape and diff <= 1e-12,
           f"reports byte-identical without timings: {same_json}; max component diff {diff:.1e}")
