"""The hambucket command line.

Subcommands: gen, solve, naive, bench, exponent, verify.  Exit codes:
0 success, 1 verification failure, 2 usage or input errors.  Errors print
a one-line cause on stderr.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys

import numpy as np

from .analysis import (
    DistributionModel,
    choose_params,
    expected_pairs_exponent,
    lower_bound_exponent,
    theta_distribution,
    theta_uniform,
    verify_survival_counts,
)
from .bench import emit_csv, run_bench
from .bitvec import make_rng
from .generator import gen_instance, read_instance, write_instance
from .solver import Strategy, naive_search, solve


def _add_tuning_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--depth", type=int, help="tree depth (number of blocks)")
    p.add_argument("--branching", type=int, help="z draws per node")
    p.add_argument("--perms", type=int, help="permutation rounds")
    p.add_argument("--delta", type=float, help="relative bucket radius")
    p.add_argument("--strategy", default="exact", help="exact | dev:<eps> | atmost")
    p.add_argument("--threshold", type=int, help="sublist size handed to the quadratic scan")
    p.add_argument("--seed", type=int, default=0, help="solver randomness seed")
    p.add_argument("--all", action="store_true", help="collect every match instead of stopping at the first")


def _tuning_overrides(args) -> dict:
    out = {}
    if args.depth is not None:
        out["depth"] = args.depth
    if args.branching is not None:
        out["branching"] = args.branching
    if args.perms is not None:
        out["permutations"] = args.perms
    if args.delta is not None:
        out["delta"] = args.delta
    if args.threshold is not None:
        out["naive_threshold"] = args.threshold
    return out


def _print_matches(matches, summary: str) -> None:
    for m in matches:
        print(f"{m.i} {m.j} {m.dist}")
    print(summary)


def cmd_gen(args) -> int:
    model = DistributionModel.from_token(args.model)
    inst = gen_instance(args.d, args.n, args.gamma, model, args.seed)
    write_instance(inst, args.out)
    print(f"wrote {args.out}: d={inst.d} n={inst.n} gamma={inst.gamma_count} planted={inst.planted[0]},{inst.planted[1]}")
    return 0


def cmd_solve(args) -> int:
    inst = read_instance(args.infile)
    params = choose_params(
        inst.d,
        math.log2(inst.n) / inst.d,
        inst.gamma_count / inst.d,
        strategy=Strategy.from_token(args.strategy),
        stop_on_first=not args.all,
        **_tuning_overrides(args),
    )
    report = solve(inst, params, make_rng(args.seed))
    planted = "n/a" if report.planted_found is None else str(report.planted_found).lower()
    _print_matches(
        report.matches,
        f"# matches={len(report.matches)} nodes={report.nodes_visited} "
        f"comparisons={report.naive_comparisons} time={report.wall_time:.6f}s "
        f"planted_found={planted}",
    )
    return 0


def cmd_naive(args) -> int:
    inst = read_instance(args.infile)
    import time

    t0 = time.perf_counter()
    matches = naive_search(inst)
    elapsed = time.perf_counter() - t0
    planted = "n/a"
    if inst.planted is not None:
        planted = str(tuple(inst.planted) in {(m.i, m.j) for m in matches}).lower()
    _print_matches(
        matches,
        f"# matches={len(matches)} comparisons={inst.n * inst.n} "
        f"time={elapsed:.6f}s planted_found={planted}",
    )
    return 0


def _parse_sweep(text: str):
    """a:b:step inclusive sweep, or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"malformed sweep {text!r}, want a:b:step")
    a, b, step = (float(x) for x in parts)
    if step <= 0 or b < a:
        raise ValueError(f"malformed sweep {text!r}: need step > 0 and b >= a")
    out = []
    g = a
    while g <= b + 1e-9:
        out.append(round(g, 12))
        g += step
    return out


def cmd_bench(args) -> int:
    model = DistributionModel.from_token(args.model)
    gammas = _parse_sweep(args.gamma_sweep)
    records = run_bench(
        args.d,
        args.n,
        gammas,
        model,
        args.trials,
        Strategy.from_token(args.strategy),
        args.seed,
        stop_on_first=not args.all,
        **_tuning_overrides(args),
    )
    csv_text = emit_csv(records)
    if args.csv:
        with open(args.csv, "w", encoding="ascii", newline="\n") as fh:
            fh.write(csv_text)
        print(f"wrote {len(records)} records to {args.csv}")
    else:
        sys.stdout.write(csv_text)
    for g in gammas:
        rows = [r for r in records if r.gamma == g]
        med_s = statistics.median(r.solver_ns for r in rows) / 1e9
        med_n = statistics.median(r.naive_ns for r in rows) / 1e9
        hits = sum(r.found for r in rows)
        print(
            f"# gamma={g:g}: median solver {med_s:.4f}s, median naive {med_n:.4f}s, "
            f"ratio {med_s / med_n:.3f}, planted found {hits}/{len(rows)}"
        )
    return 0


def cmd_exponent(args) -> int:
    model = DistributionModel.from_token(args.model) if args.model else None
    if model is not None and model.kind == "poisson":
        print("# poisson weight treated as fixed weight at its mean (approximation)")

    def result_at(gamma: float):
        if model is None or model.kind == "uniform":
            return theta_uniform(args.lam, gamma)
        return theta_distribution(args.lam, gamma, model)

    if args.sweep:
        print("gamma,theta,delta,regime,lower_bound,pairs_exponent")
        for gamma in np.linspace(0.0, 0.5, args.points):
            res = result_at(float(gamma))
            print(
                f"{gamma:.6f},{res.theta:.9f},{res.delta:.9f},{res.regime.value},"
                f"{lower_bound_exponent(args.lam, float(gamma)):.9f},"
                f"{expected_pairs_exponent(args.lam, float(gamma)):.9f}"
            )
        return 0
    res = result_at(args.gamma)
    print(f"lambda          {args.lam:g}")
    print(f"gamma           {args.gamma:g}")
    print(f"theta           {res.theta:.12f}")
    print(f"delta           {res.delta:.12f}")
    print(f"regime          {res.regime.value}")
    print(f"delta_star      {res.delta_star:.12f}")
    print(f"gamma_star      {res.gamma_star:.12f}")
    print(f"lower_bound     {lower_bound_exponent(args.lam, args.gamma):.12f}")
    print(f"pairs_exponent  {expected_pairs_exponent(args.lam, args.gamma):.12f}")
    return 0


def cmd_verify(args) -> int:
    cases, mismatches = verify_survival_counts(args.kmax)
    if mismatches:
        for line in mismatches[:20]:
            print(f"error: {line}", file=sys.stderr)
        print(f"error: {len(mismatches)} mismatches in {cases} cases", file=sys.stderr)
        return 1
    print(f"ok: closed-form p and q match enumeration for all k <= {args.kmax} ({cases} cases)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hambucket",
        description="Bichromatic closest-pair search in the Hamming metric.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a planted instance file")
    p.add_argument("--d", type=int, required=True, help="dimension")
    p.add_argument("--n", type=int, required=True, help="vectors per list")
    p.add_argument("--gamma", type=int, required=True, help="planted distance (absolute count)")
    p.add_argument("--model", default="uniform", help="uniform | fixed:<eta> | bernoulli:<mu> | poisson:<f>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run the bucketing solver on an instance file")
    p.add_argument("--in", dest="infile", required=True, help="instance path")
    _add_tuning_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("naive", help="run the exhaustive quadratic scan")
    p.add_argument("--in", dest="infile", required=True, help="instance path")
    p.set_defaults(func=cmd_naive)

    p = sub.add_parser("bench", help="time solver vs naive over a gamma sweep")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma-sweep", required=True, help="a:b:step (relative gamma), or one value")
    p.add_argument("--model", default="uniform")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--csv", help="write records to this file instead of stdout")
    _add_tuning_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("exponent", help="asymptotic runtime exponents")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="list size exponent")
    p.add_argument("--gamma", type=float, default=0.0, help="relative planted distance")
    p.add_argument("--model", help="weight model (default: uniform closed form)")
    p.add_argument("--sweep", action="store_true", help="emit a gamma curve as CSV")
    p.add_argument("--points", type=int, default=65, help="sweep resolution")
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("verify", help="check closed-form p/q against enumeration")
    p.add_argument("--kmax", type=int, default=14)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
