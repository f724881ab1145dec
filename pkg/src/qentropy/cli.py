"""Command-line front end.

Subcommands: estimate (one trial, JSON report to stdout), experiment
(config file -> CSV), verify (invariant suites), exact (closed-form measure
of a distribution).  Statistical failure of an estimate is data, not an
error; nonzero exits are reserved for invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .harness import (
    SEED_ENV_VAR,
    SUITES,
    ExperimentConfig,
    evaluate_measure,
    resolve_distribution,
    run_cell_trial,
    run_experiment,
    run_suite,
    suite_passed,
)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError("not JSON serializable: %r" % type(obj))


def _parse_alpha(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _default_seed() -> int | None:
    raw = os.environ.get(SEED_ENV_VAR)
    return int(raw) if raw else None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qentropy",
        description="Query-charged simulation of quantum entropy estimators.")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="run one estimator trial, print a JSON report")
    est.add_argument("--algo", required=True,
                     choices=["shannon", "kl", "renyi", "minentropy",
                              "coverage", "support", "plugin"])
    est.add_argument("--dist", required=True,
                     help="instance spec (uniform:64, zipf:1.5:256, ...) or JSON file")
    est.add_argument("--dist-q", help="second distribution (kl)")
    est.add_argument("--f-n", type=float, dest="f_n",
                     help="ratio bound for kl (default: exact bound of the pair)")
    est.add_argument("--alpha", type=_parse_alpha, help="order for renyi (or 'inf')")
    est.add_argument("--eps", type=float, default=0.25)
    est.add_argument("--delta", type=float, default=0.1)
    est.add_argument("--seed", type=int, default=_default_seed())
    est.add_argument("--mode", choices=["contract", "exact-expectation"],
                     default="contract")
    est.add_argument("--m", type=int, help="promise parameter for support")
    est.add_argument("--n-samples", type=int, dest="n_samples",
                     help="sample count for coverage / plugin")
    est.add_argument("--measure", help="measure for plugin (e.g. shannon, renyi:2)")
    est.add_argument("--distinctness-cost", choices=["belovs", "ambainis", "flat34"],
                     dest="distinctness_cost")
    est.add_argument("--timing", action="store_true",
                     help="fill wall_ms (breaks byte-identical reruns)")

    exp = sub.add_parser("experiment", help="run a batch experiment to CSV")
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", required=True)

    ver = sub.add_parser("verify", help="run an invariant suite")
    ver.add_argument("suite", choices=sorted(SUITES) + ["all"])

    exa = sub.add_parser("exact", help="closed-form measure of a distribution")
    exa.add_argument("--dist", required=True)
    exa.add_argument("--measure", required=True,
                     help="shannon | renyi:<a> | minentropy | support | "
                          "power-sum:<a> | coverage:<t> | kl")
    exa.add_argument("--dist-q", help="second distribution for kl")
    return parser


def _cmd_estimate(args) -> int:
    cell = {"algo": args.algo, "dist": args.dist, "eps": args.eps,
            "delta": args.delta, "mode": args.mode}
    if args.dist_q is not None:
        cell["dist_q"] = args.dist_q
    if args.f_n is not None:
        cell["f"] = args.f_n
    if args.alpha is not None:
        cell["alpha"] = args.alpha
    if args.m is not None:
        cell["m"] = args.m
    if args.n_samples is not None:
        cell["n_samples"] = args.n_samples
    if args.measure is not None:
        cell["measure"] = args.measure
    if args.distinctness_cost is not None:
        cell["distinctness_cost"] = args.distinctness_cost
    report = run_cell_trial(cell, args.seed, record_timing=args.timing)
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2,
                     default=_json_default))
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    rows = run_experiment(config, args.out)
    print("wrote %d rows to %s" % (rows, args.out))
    return 0


def _cmd_verify(args) -> int:
    results = run_suite(args.suite)
    for check in results:
        if check.passed:
            status = "pass"
        elif check.known_defect:
            status = "KNOWN-DEFECT"
        else:
            status = "FAIL"
        line = "[%s] %s/%s  margin=%+.3e" % (status, check.suite, check.name, check.margin)
        if check.detail:
            line += "  (%s)" % check.detail
        print(line)
    passed = sum(1 for c in results if c.passed)
    defects = sum(1 for c in results if c.known_defect and not c.passed)
    print("suite %s: %d/%d checks passed%s" % (
        args.suite, passed, len(results),
        ", %d known defects documented" % defects if defects else ""))
    return 0 if suite_passed(results) else 1


def _cmd_exact(args) -> int:
    dist = resolve_distribution(args.dist)
    dist_q = resolve_distribution(args.dist_q) if args.dist_q else None
    value = evaluate_measure(dist, args.measure, dist_q)
    print(json.dumps({"measure": args.measure, "value": value,
                      "n": dist.n, "S": dist.denominator},
                     sort_keys=True, default=_json_default))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "estimate": _cmd_estimate,
        "experiment": _cmd_experiment,
        "verify": _cmd_verify,
        "exact": _cmd_exact,
    }[args.command]
    try:
        return handler(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
