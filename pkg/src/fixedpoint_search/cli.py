"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 a check failed its tolerance.
Results go to stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from fixedpoint_search import analytic, experiments
from fixedpoint_search.corevec import (
    RegisterLayout,
    TargetSet,
    basis_state,
    target_probability,
    two_level_unitary,
    unitary_with_error,
)
from fixedpoint_search.errors import SearchError
from fixedpoint_search.measured import (
    RunConfig,
    expected_queries,
    sample_trajectories,
)
from fixedpoint_search.opseq import MAX_LEVEL, apply_tree, build_phase_search, count_queries

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE = 0, 2, 3
IDENTITY_TOL = 1e-10
MC_SIGMAS = 3.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _config_line(args) -> str:
    items = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return "config: " + " ".join(f"{k}={v}" for k, v in items.items())


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def _unit_interval(text: str) -> float:
    x = float(text)
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is outside [0, 1]")
    return x


def cmd_identity_check(args) -> int:
    if not 0 <= args.level <= MAX_LEVEL:
        return _fail(f"--level must lie in 0..{MAX_LEVEL}")
    if args.random_u is not None:
        n = args.qubits
        if n is None or not 1 <= n <= 12:
            return _fail("--random-u needs --qubits N with 1 <= N <= 12")
        rng = np.random.default_rng(args.random_u)
        # leave at least one unmarked item so every eps in [0, 1] is realizable
        size = int(rng.integers(1, 1 << n))
        t = TargetSet(n, rng.choice(1 << n, size=size, replace=False).tolist())
        u = unitary_with_error(n, t, args.eps, rng)
    else:
        n = 1
        t = TargetSet(1, [1])
        u = two_level_unitary(args.eps)
    s = basis_state(RegisterLayout(n))
    out, queries = apply_tree(build_phase_search(args.level), u, s, t, s)
    simulated = 1.0 - target_probability(out, t)
    expected = analytic.recursion_error(args.eps, args.level)
    ok = abs(simulated - expected) <= IDENTITY_TOL and queries == count_queries(args.level)
    print(experiments.format_report({
        "qubits": n,
        "marked_count": len(t.marked),
        "queries": queries,
        "error_simulated": simulated,
        "error_expected": expected,
        "abs_diff": abs(simulated - expected),
        "tolerance": IDENTITY_TOL,
        "result": "PASS" if ok else "FAIL",
    }), end="")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_section4(args) -> int:
    errs = experiments.section4_errors()
    print(experiments.format_report({f"overall_error_{k}": v for k, v in errs.items()}), end="")
    return EXIT_OK


def _write_curves(algorithms, q, grid, out) -> list:
    rows = experiments.sweep_curves(algorithms, q, grid)
    experiments.write_csv(rows, algorithms, out)
    print(f"rows={len(rows)}")
    print(f"out={out}")
    return rows


def cmd_fig4(args) -> int:
    algorithms = ["pi3", "younes"]
    rows = _write_curves(algorithms, args.queries, args.grid, args.out)
    ok = experiments.dominates(rows, "pi3", "younes", 0.75)
    print(f"dominance_pi3_over_younes_f_ge_0.75={'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_sweep(args) -> int:
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    if not algorithms:
        return _fail("--algorithms is empty")
    _write_curves(algorithms, args.queries, args.grid, args.out)
    return EXIT_OK


def cmd_demo(args) -> int:
    try:
        marked = [int(x) for x in args.marked.split(",") if x.strip()]
    except ValueError:
        return _fail(f"--marked must be a comma-separated list of integers, got {args.marked!r}")
    if not marked:
        return _fail("--marked is empty; the demo needs at least one marked item")
    rep = experiments.demo_database(args.qubits, marked, args.algorithm, args.q, args.seed, args.shots)
    print(experiments.format_report(rep.as_dict()), end="")
    ok = rep.simulated_success is None or abs(rep.simulated_success - rep.analytic_success) <= IDENTITY_TOL
    if rep.empirical_success is not None:
        sigma = rep.ci_halfwidth / 1.96
        ok = ok and abs(rep.empirical_success - rep.analytic_success) <= MC_SIGMAS * max(sigma, 1e-12)
    print(f"result={'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_expected_queries(args) -> int:
    if args.q < 1:
        return _fail("--q must be at least 1")
    value = expected_queries(args.eps, args.q)
    report = {"expected_queries": value, "max_queries": args.q}
    ok = True
    if args.trajectories:
        if args.seed is None:
            return _fail("--trajectories needs --seed")
        cfg = RunConfig(args.q, "interactive_mc", args.seed)
        trajs = sample_trajectories(cfg, two_level_unitary(args.eps), TargetSet(1, [1]), args.trajectories)
        qs = np.array([tr.queries for tr in trajs], dtype=float)
        mean = float(qs.mean())
        se = float(qs.std(ddof=1) / np.sqrt(len(qs))) if len(qs) > 1 else 0.0
        report.update(mc_mean=mean, mc_stderr=se)
        ok = abs(mean - value) <= MC_SIGMAS * se + 1e-12
        report["result"] = "PASS" if ok else "FAIL"
    print(experiments.format_report(report), end="")
    return EXIT_OK if ok else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fpsearch", description="Fixed-point quantum search experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("identity-check", help="simulate the recursion and compare with eps^(3^L)")
    c.add_argument("--eps", type=_unit_interval, required=True)
    c.add_argument("--level", type=int, required=True)
    c.add_argument("--random-u", type=int, metavar="SEED", help="use a random unitary from this seed")
    c.add_argument("--qubits", type=int, help="register size for --random-u")
    c.set_defaults(func=cmd_identity_check)

    c = sub.add_parser("section4", help="overall one-query error for f uniform on [0.75, 1]")
    c.set_defaults(func=cmd_section4)

    c = sub.add_parser("fig4", help="pi3 vs Younes success curves as CSV")
    c.add_argument("--queries", type=int, choices=(1, 13), required=True)
    c.add_argument("--grid", type=int, default=101)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_fig4)

    c = sub.add_parser("sweep", help="success curves for any algorithms as CSV")
    c.add_argument("--algorithms", required=True, help="comma-separated, e.g. classical,pi3,measured")
    c.add_argument("--queries", type=int, required=True)
    c.add_argument("--grid", type=int, default=101)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_sweep)

    c = sub.add_parser("demo", help="run one algorithm on a Walsh-Hadamard database")
    c.add_argument("--qubits", type=int, required=True)
    c.add_argument("--marked", required=True, help="comma-separated marked indices")
    c.add_argument("--algorithm", choices=experiments.ALGORITHMS, required=True)
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--shots", type=int, default=10_000)
    c.set_defaults(func=cmd_demo)

    c = sub.add_parser("expected-queries", help="mean queries of the measured search")
    c.add_argument("--eps", type=_unit_interval, required=True)
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--trajectories", type=int, default=0)
    c.add_argument("--seed", type=int)
    c.set_defaults(func=cmd_expected_queries)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    print(_config_line(args))
    try:
        return args.func(args)
    except SearchError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
