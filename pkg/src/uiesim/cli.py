"""Command-line entry point: ``uiesim {run,sweep,stabilize,oracle,fit}``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import oracles
from .engine import ConfigError, SimConfig, TraceMode, run_simulation
from .experiments import (
    ALPHA1,
    ALPHA2,
    SweepSpec,
    fit_scaling,
    read_csv,
    safe_range_occupancy,
    stabilization_experiment,
    sweep,
    write_csv,
)
from .model import DEFAULT_ZETA


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_run(args):
    cfg = SimConfig(
        args.nodes,
        args.sources,
        args.channels,
        zeta=args.zeta,
        seed=args.seed,
        max_rounds=args.max_rounds,
        trace_mode=TraceMode.FULL if args.occupancy else TraceMode.SUMMARY_ONLY,
    )
    trace_fh = open(args.trace_out, "w", encoding="utf-8") if args.trace_out else None
    try:
        sink = (lambda tr: trace_fh.write(tr.to_json() + "\n")) if trace_fh else None
        res = run_simulation(cfg, trace_sink=sink, check=args.check)
    finally:
        if trace_fh:
            trace_fh.close()
    summary = res.summary()
    if args.check:
        summary["violations"] = res.violations
    if args.occupancy:
        summary["safe_range_occupancy"] = safe_range_occupancy(
            res.traces, args.alpha1, args.alpha2, cfg.channels, cfg.n
        )
    _dump(summary, args.summary_out)
    return 0


def cmd_sweep(args):
    with open(args.spec, encoding="utf-8") as fh:
        spec = SweepSpec.parse(fh.read())
    out = args.out or spec.out
    if not out:
        raise ConfigError("no output path: pass --out or set out= in the spec")
    rows = sweep(spec, workers=args.workers)
    write_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    return 0


def cmd_stabilize(args):
    seeds = list(range(args.seed_base, args.seed_base + args.seeds))
    rep = stabilization_experiment(
        args.nodes,
        args.channels,
        args.p_star,
        seeds,
        zeta=args.zeta,
        alpha1=args.alpha1,
        alpha2=args.alpha2,
        hold_active=args.hold_active,
        max_rounds=args.max_rounds,
    )
    _dump({
        "n": rep.n,
        "F": rep.F,
        "p_star": rep.p_star,
        "per_node_p": rep.per_node_p,
        "recovery": rep.recovery,
        "median": rep.median,
        "censored": rep.censored,
        "predictor": rep.predictor,
    })
    return 0


def cmd_oracle(args):
    rng = np.random.default_rng(args.seed)
    if args.check == "q1q0":
        ok = 0
        for _ in range(args.trials):
            p = rng.uniform(0, 0.5, size=rng.integers(1, 21))
            p = p[p > 0]
            ok += oracles.verify_q1_q0_bound(p.tolist())
        report = {"check": "q1q0", "trials": args.trials, "passed": ok}
    elif args.check == "product-bound":
        ok = 0
        for _ in range(args.trials):
            b = rng.uniform(0, 0.5, size=rng.integers(0, 21))
            ok += oracles.product_bound_check(b.tolist())
        report = {"check": "product-bound", "trials": args.trials, "passed": ok}
    else:
        weighted = oracles.weighted_trials(args.bins, 1.0, args.zeta, args.trials, args.seed)
        unweighted = oracles.unweighted_trials(args.bins, args.delta, args.trials, args.seed)
        report = {
            "check": "bins",
            "H": args.bins,
            "trials": args.trials,
            "weighted_success_rate": oracles.success_rate(weighted, "good_weight_bins"),
            "mean_good_weight_bins": float(np.mean([s.good_weight_bins for s in weighted])),
            "unweighted_success_rate": oracles.success_rate(unweighted, "bins_with_2plus"),
            "zeta_conditions": oracles.zeta_conditions(args.zeta),
        }
    _dump(report)
    return 0


def cmd_fit(args):
    fit = fit_scaling(read_csv(args.inp))
    _dump({
        "C": fit.C,
        "max_residual": fit.max_residual,
        "cells": [
            {"n": c[0], "k": c[1], "F": c[2], "median_T_star": fit.medians[c],
             "residual": fit.residuals[c]}
            for c in sorted(fit.medians)
        ],
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uiesim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single simulation")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--sources", type=int, required=True)
    p.add_argument("--channels", type=int, required=True)
    p.add_argument("--zeta", type=float, default=DEFAULT_ZETA)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--trace-out", help="JSON-lines file, one object per round")
    p.add_argument("--summary-out", help="summary JSON file (default: stdout)")
    p.add_argument("--check", action="store_true", help="check invariants every round")
    p.add_argument("--occupancy", action="store_true", help="report safe-range occupancy")
    p.add_argument("--alpha1", type=float, default=ALPHA1)
    p.add_argument("--alpha2", type=float, default=ALPHA2)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    p.add_argument("--spec", required=True, help="key=value sweep spec file")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stabilize", help="recovery time into the safe range")
    p.add_argument("--nodes", type=int, default=4096)
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--p-star", type=float, required=True, help="initial total probability")
    p.add_argument("--hold-active", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--seeds", type=int, default=20, help="number of seeds")
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--zeta", type=float, default=DEFAULT_ZETA)
    p.add_argument("--alpha1", type=float, default=ALPHA1)
    p.add_argument("--alpha2", type=float, default=ALPHA2)
    p.add_argument("--max-rounds", type=int, default=2000)
    p.set_defaults(func=cmd_stabilize)

    p = sub.add_parser("oracle", help="probabilistic building-block checks")
    p.add_argument("check", choices=["q1q0", "bins", "product-bound"])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--delta", type=int, default=16)
    p.add_argument("--zeta", type=float, default=DEFAULT_ZETA)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("fit", help="fit the completion-time scaling constant")
    p.add_argument("--in", dest="inp", required=True, help="CSV from 'sweep'")
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
