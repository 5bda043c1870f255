"""Command-line front end.

Results go to stdout as CSV or ``key=value`` lines; diagnostics go to stderr.
Exit codes: 0 success, 1 input error, 2 certificate failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis
from .core import SpecError, load_spec
from .dual import (exclusive_specs, load_thresholds, parse_exclusive, solve_dual,
                   thresholds_to_csv)
from .primal import exclusive_ratio, primal_from_thresholds, primal_to_csv
from .protocol import InstanceError, ProtocolError, format_run, load_instance, run_instance
from .simulate import monte_carlo
from .verify import certify_optimal

EXIT_INPUT = 1
EXIT_CERT = 2


def fmt(x: float) -> str:
    return f"{x:.10g}"


def _table_for(args, spec):
    if getattr(args, "thresholds", None):
        return load_thresholds(args.thresholds, spec, args.horizon)
    return solve_dual(spec, args.horizon)[1]


def cmd_thresholds(args) -> int:
    spec = load_spec(args.spec)
    if args.exclusive:
        parts = exclusive_specs(spec, parse_exclusive(args.exclusive))
        chunks = []
        for q, (sq, nq) in enumerate(parts):
            _, table = solve_dual(sq, nq)
            chunks.append(thresholds_to_csv(table, queue_offset=q) if q else thresholds_to_csv(table))
        text = "".join(chunks)
    else:
        _, table = solve_dual(spec, args.horizon)
        text = thresholds_to_csv(table)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    spec = load_spec(args.spec)
    table = load_thresholds(args.thresholds, spec, args.horizon)
    arrival = load_instance(args.instance, spec.n)
    hires, payoff = run_instance(spec, table, arrival)
    sys.stdout.write(format_run(hires, payoff))
    return 0


def cmd_exact(args) -> int:
    spec = load_spec(args.spec)
    if args.exclusive:
        parts = []
        for q, (sq, nq) in enumerate(exclusive_specs(spec, parse_exclusive(args.exclusive)), 1):
            _, table = solve_dual(sq, nq)
            r = primal_from_thresholds(sq, table).objective
            parts.append((sq, r))
            print(f"queue={q} J={sq.J} n_q={nq} ratio={fmt(r)}")
        print(f"ratio={fmt(exclusive_ratio(parts, spec))}")
        return 0
    table = _table_for(args, spec)
    sol = primal_from_thresholds(spec, table)
    if args.dump_x:
        Path(args.dump_x).write_text(primal_to_csv(sol))
    print(f"ratio={fmt(sol.objective)}")
    return 0


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    table = _table_for(args, spec)
    report = monte_carlo(spec, table, args.trials, args.seed, threads=args.threads)
    print("\n".join(report.lines()))
    return 0


def cmd_verify(args) -> int:
    spec = load_spec(args.spec)
    dual, table = solve_dual(spec, args.horizon)
    primal = primal_from_thresholds(spec, table)
    report = certify_optimal(spec, primal, dual)
    print("\n".join(report.lines()))
    return 0 if report.certified else EXIT_CERT


def cmd_analyze(args) -> int:
    if args.case == "table1":
        print("K,ratio")
        for K, r in analysis.table1_reproduce(args.n, args.kmax):
            print(f"{K},{fmt(r)}")
    elif args.case == "kbound":
        print("K,bound")
        for K in range(2, args.kmax + 1):
            print(f"{K},{fmt(analysis.k_best_lower_bound(K))}")
    else:
        print("\n".join(analysis.solve_222_constants().lines()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qjk-secretary",
        description="Optimal threshold protocol for the shared Q-queue J-choice K-best secretary problem.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_spec(p):
        p.add_argument("spec", help="problem spec file (key=value lines)")
        p.add_argument("--horizon", type=int, default=None,
                       help="interview only the first m positions per queue")
        return p

    p = with_spec(sub.add_parser("thresholds", help="compute the crucial-position table"))
    p.add_argument("--out", help="also write the CSV to this path")
    p.add_argument("--exclusive", help="per-queue quotas and sizes, J_1:n_1,J_2:n_2,...")
    p.set_defaults(func=cmd_thresholds)

    p = with_spec(sub.add_parser("run", help="run the protocol on one arrival order"))
    p.add_argument("thresholds", help="threshold CSV")
    p.add_argument("instance", help="whitespace-separated permutation of 1..n")
    p.set_defaults(func=cmd_run)

    p = with_spec(sub.add_parser("exact", help="exact competitive ratio"))
    p.add_argument("--thresholds", help="evaluate this table instead of the optimal one")
    p.add_argument("--exclusive", help="per-queue quotas and sizes, J_1:n_1,J_2:n_2,...")
    p.add_argument("--dump-x", help="write the primal solution as CSV q,i,j,k,x")
    p.set_defaults(func=cmd_exact)

    p = with_spec(sub.add_parser("simulate", help="seeded Monte Carlo ratio estimate"))
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--thresholds", help="simulate this table instead of the optimal one")
    p.set_defaults(func=cmd_simulate)

    p = with_spec(sub.add_parser("verify", help="optimality certificate"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", help="closed-form and table results")
    p.add_argument("--case", choices=["table1", "kbound", "222"], required=True)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--kmax", type=int, default=10)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, InstanceError, ProtocolError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
