#!/usr/bin/env python3
"""Tabulate runtime exponents over gamma for the uniform and weighted models.

Produces a CSV with one theta column per model, ready for plotting:

    python scripts/exponent_curves.py --lambda 0.25 \
        --models uniform fixed:0.3 fixed:0.1 --points 65 --out curves.csv
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hambucket.analysis import (
    DistributionModel,
    expected_pairs_exponent,
    lower_bound_exponent,
    theta_distribution,
    theta_uniform,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda", dest="lam", type=float, required=True)
    ap.add_argument("--models", nargs="+", default=["uniform", "fixed:0.3"])
    ap.add_argument("--points", type=int, default=65)
    ap.add_argument("--out", default="-", help="CSV path, - for stdout")
    args = ap.parse_args()

    models = [DistributionModel.from_token(t) for t in args.models]
    header = ["gamma"] + [f"theta_{m.token()}" for m in models]
    header += ["lower_bound", "pairs_exponent"]
    rows = [",".join(header)]
    for i in range(args.points):
        gamma = 0.5 * i / (args.points - 1)
        cells = [f"{gamma:.6f}"]
        for m in models:
            if m.kind == "uniform":
                theta = theta_uniform(args.lam, gamma).theta
            else:
                theta = theta_distribution(args.lam, gamma, m).theta
            cells.append(f"{theta:.9f}")
        cells.append(f"{lower_bound_exponent(args.lam, gamma):.9f}")
        cells.append(f"{expected_pairs_exponent(args.lam, gamma):.9f}")
        rows.append(",".join(cells))

    text = "\n".join(rows) + "\n"
    if args.out == "-":
        print(text, end="")
    else:
        Path(args.out).write_text(text)
        print(f"wrote {args.out} ({args.points} rows)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
