"""Line charts with error bands from sweep CSVs.

Input is the harness sweep format: one row per (n, seed) with metric
columns and a status column. Rows whose status is not "ok" are skipped.
Each chart panel plots one metric's per-n mean with a +-stdev band over
seeds; alongside the image a numeric sidecar CSV records the aggregated
values so correctness can be checked without image diffing.
"""

import csv
import statistics
from dataclasses import dataclass, field

REQUIRED_COLUMNS = ("n", "seed", "status")
METRICS = ("avg_exploitability", "eps_theory", "eps_empirical")


class SchemaError(ValueError):
    """CSV lacks a required column."""


class EmptyInput(ValueError):
    """No usable rows in the CSV."""


@dataclass
class ChartSpec:
    input_csv: str
    metrics: list = field(default_factory=lambda: ["eps_theory"])
    output: str = "chart.png"
    log_x: bool = True

    @property
    def sidecar(self) -> str:
        return self.output + ".data.csv"


def load_rows(path, metrics):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        for column in (*REQUIRED_COLUMNS, *metrics):
            if column not in columns:
                raise SchemaError(f"column {column!r} missing from {path}")
        rows = [r for r in reader if r["status"] == "ok"]
    if not rows:
        raise EmptyInput(f"no ok rows in {path}")
    return rows


def aggregate(rows, metric):
    """Per-n mean and sample stdev over seeds, n ascending."""
    groups = {}
    for row in rows:
        groups.setdefault(int(row["n"]), []).append(float(row[metric]))
    out = []
    for n in sorted(groups):
        values = groups[n]
        spread = statistics.stdev(values) if len(values) > 1 else 0.0
        out.append((n, statistics.fmean(values), spread, len(values)))
    return out


def write_sidecar(path, tables):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "n", "mean", "stdev", "count"])
        for metric, table in tables.items():
            for n, mean, spread, count in table:
                writer.writerow([metric, n, repr(mean), repr(spread), count])


def render(spec: ChartSpec) -> dict:
    """Draw the chart, write image + sidecar, return the aggregated tables."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for metric in spec.metrics:
        if metric not in METRICS:
            raise SchemaError(f"unknown metric {metric!r}; choose from {METRICS}")
    rows = load_rows(spec.input_csv, spec.metrics)
    tables = {metric: aggregate(rows, metric) for metric in spec.metrics}

    fig, axes = plt.subplots(
        1, len(spec.metrics), figsize=(5.0 * len(spec.metrics), 3.6), squeeze=False
    )
    for ax, metric in zip(axes[0], spec.metrics):
        table = tables[metric]
        ns = [r[0] for r in table]
        means = [r[1] for r in table]
        lo = [r[1] - r[2] for r in table]
        hi = [r[1] + r[2] for r in table]
        ax.plot(ns, means, marker="o", linewidth=1.5)
        ax.fill_between(ns, lo, hi, alpha=0.25)
        if spec.log_x and min(ns) > 0:
            ax.set_xscale("log", base=2)
        ax.set_xlabel("players (n)")
        ax.set_ylabel(metric)
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=120)
    plt.close(fig)
    write_sidecar(spec.sidecar, tables)
    return tables
