#!/usr/bin/env python3
"""Sweep all three bucket strategies over a gamma range and emit one CSV.

Typical run (a few minutes):

    python scripts/benchmark_strategies.py --d 64 --n 4096 \
        --gammas 0.0625:0.25:0.0625 --trials 5 --out strategies.csv
"""

import argparse
import statistics
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hambucket.bench import emit_csv, run_bench
from hambucket.generator import DistributionModel
from hambucket.solver import Strategy


def parse_sweep(text: str) -> list[float]:
    parts = [float(p) for p in text.split(":")]
    if len(parts) == 1:
        return parts
    lo, hi, step = parts
    out, g = [], lo
    while g <= hi + 1e-9:
        out.append(round(g, 12))
        g += step
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=64)
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--gammas", default="0.0625:0.25:0.0625", help="a:b:step, relative")
    ap.add_argument("--model", default="uniform")
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-", help="CSV path, - for stdout")
    args = ap.parse_args()

    gammas = parse_sweep(args.gammas)
    model = DistributionModel.from_token(args.model)
    records = []
    for token in ("exact", "dev:1", "atmost"):
        records.extend(
            run_bench(args.d, args.n, gammas, model, args.trials,
                      Strategy.from_token(token), args.seed)
        )
        by_gamma = {}
        for r in records:
            if r.strategy == token:
                by_gamma.setdefault(r.gamma, []).append(r)
        for g, rows in sorted(by_gamma.items()):
            med = statistics.median(r.solver_ns for r in rows) / 1e9
            found = sum(r.found for r in rows)
            print(f"# {token} gamma={g:g}: median {med:.3f}s, "
                  f"planted found {found}/{len(rows)}", file=sys.stderr)

    text = emit_csv(records)
    if args.out == "-":
        print(text, end="")
    else:
        Path(args.out).write_text(text)
        print(f"wrote {args.out} ({len(records)} rows)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
