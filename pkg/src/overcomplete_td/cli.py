"""Command-line entry point: ``python -m overcomplete_td <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import io as binio
from .harness.bench import bench, write_csv, write_json
from .harness.diagnostics import diagnostics_nicely_separated
from .harness.evaluation import match_and_score
from .harness.instances import sample_components
from .harness.jennrich import jennrich_oracle
from .lifting import LiftConfig
from .recovery import RecoveryConfig, decompose
from .rounding import RoundingConfig
from .tensor_core import build_symmetric_tensor

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


def _dump(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_gen(args) -> int:
    A = sample_components(args.dim, args.rank, args.seed)
    binio.write_components(args.out, A)
    if args.tensor_out:
        binio.write_tensor(args.tensor_out, build_symmetric_tensor(A))
    _dump({"schema_version": 1, "d": args.dim, "n": args.rank, "seed": args.seed,
           "components": args.out, "tensor": args.tensor_out}, None)
    return EXIT_OK


def cmd_decompose(args) -> int:
    T = binio.read_tensor(args.tensor)
    rounding = RoundingConfig(budget_scale=args.budget_scale,
                              accept_threshold=args.accept_threshold,
                              dup_threshold=args.dup_threshold)
    lifting = LiftConfig() if args.lift_iters is None else LiftConfig(iters=args.lift_iters)
    cfg = RecoveryConfig(rounding=rounding, lifting=lifting, seed=args.seed,
                         max_outer_rounds=args.max_rounds, boost_iters=args.boost_iters)
    res = decompose(T, args.rank, cfg)
    binio.write_components(args.out, res.components)
    doc = res.to_json(components_ref=args.out, include_timings=not args.no_timings)
    _dump(doc, args.report)
    return EXIT_OK if res.converged else EXIT_PARTIAL


def cmd_eval(args) -> int:
    rep = match_and_score(binio.read_components(args.truth), binio.read_components(args.est),
                          flip_signs=args.flip_signs)
    _dump(rep.to_json(), args.report)
    return EXIT_OK if rep.complete else EXIT_PARTIAL


def cmd_diag(args) -> int:
    _dump(diagnostics_nicely_separated(binio.read_components(args.components), args.n_ambient),
          args.report)
    return EXIT_OK


def cmd_jennrich(args) -> int:
    res = jennrich_oracle(binio.read_tensor(args.tensor), args.rank, seed=args.seed)
    if args.out:
        binio.write_components(args.out, res.components)
    _dump({"schema_version": 1, "n": args.rank, "components": args.out,
           "weights": res.weights.tolist(), "condition": res.condition,
           "imag_max": res.imag_max,
           "vectors": None if args.out else np.round(res.components, 15).tolist()}, args.report)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = RecoveryConfig()
    if args.lift_iters is not None:
        cfg = replace(cfg, lifting=LiftConfig(iters=args.lift_iters))
    rows = bench(args.grid, cfg, seed=args.seed)
    write_csv(rows, args.out)
    if args.json:
        write_json(rows, args.json)
    for r in rows:
        print(f"d={r['d']} n={r['n']} status={r['status']} success={r['success']} "
              f"lift_ms={r['lift_ms']} error={r['error']}")
    return EXIT_OK if all(not r["error"] for r in rows) else EXIT_PARTIAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="overcomplete-td", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample random unit components (and their tensor)")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--rank", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--tensor-out")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("decompose", help="recover components from a tensor file")
    d.add_argument("--tensor", required=True)
    d.add_argument("--rank", type=int, required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", required=True)
    d.add_argument("--report")
    d.add_argument("--budget-scale", type=float, default=4.0)
    d.add_argument("--accept-threshold", type=float, default=0.6)
    d.add_argument("--dup-threshold", type=float, default=0.99)
    d.add_argument("--lift-iters", type=int)
    d.add_argument("--boost-iters", type=int)
    d.add_argument("--max-rounds", type=int)
    d.add_argument("--no-timings", action="store_true", help="omit wall-clock timings from the report")
    d.set_defaults(func=cmd_decompose)

    e = sub.add_parser("eval", help="match estimated components against ground truth")
    e.add_argument("--truth", required=True)
    e.add_argument("--est", required=True)
    e.add_argument("--report")
    e.add_argument("--flip-signs", action="store_true")
    e.set_defaults(func=cmd_eval)

    q = sub.add_parser("diag", help="separation diagnostics for a component set")
    q.add_argument("--components", required=True)
    q.add_argument("--n-ambient", type=int)
    q.add_argument("--report")
    q.set_defaults(func=cmd_diag)

    j = sub.add_parser("oracle-jennrich", help="undercomplete baseline decomposition")
    j.add_argument("--tensor", required=True)
    j.add_argument("--rank", type=int, required=True)
    j.add_argument("--seed", type=int, default=0)
    j.add_argument("--out")
    j.add_argument("--report")
    j.set_defaults(func=cmd_jennrich)

    b = sub.add_parser("bench", help="time the pipeline over a (d, n) grid")
    b.add_argument("--grid", required=True, help='e.g. "d=8,16;ratio=1.0,1.5"')
    b.add_argument("--out", required=True)
    b.add_argument("--json")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--lift-iters", type=int)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
