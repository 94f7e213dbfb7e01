"""plot: render sweep CSVs into scaling charts.

    plot --in sweep.csv --metric eps_theory --out fig.png [--linear-x]

Pass --metric more than once for a multi-panel figure.
"""

import argparse
import sys

from . import METRICS, ChartSpec, EmptyInput, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot", description=__doc__)
    parser.add_argument("--in", dest="input_csv", required=True)
    parser.add_argument(
        "--metric", action="append", choices=list(METRICS), default=None,
        help="repeatable; defaults to eps_theory",
    )
    parser.add_argument("--out", required=True)
    parser.add_argument("--linear-x", action="store_true")
    args = parser.parse_args(argv)
    spec = ChartSpec(
        input_csv=args.input_csv,
        metrics=args.metric or ["eps_theory"],
        output=args.out,
        log_x=not args.linear_x,
    )
    try:
        tables = render(spec)
    except (SchemaError, EmptyInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    points = sum(len(t) for t in tables.values())
    print(f"{points} aggregated points -> {spec.output} (+ {spec.sidecar})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
