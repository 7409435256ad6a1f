#!/usr/bin/env python3
"""Plot an aggregate.csv produced by `nkcs sweep`: mean final fitness
against K, one line per policy, one panel per (n_vector, C).

Usage:
    python3 docs/plot_aggregate.py nkcs-out/aggregate.csv [out.png]
"""

import csv
import math
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def label(row: dict) -> str:
    policy = row["policy"]
    if policy == "com" and float(row["error_rate"]) > 0:
        return f"com e={row['error_rate']}"
    return policy


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else "aggregate.png"

    panels = defaultdict(lambda: defaultdict(list))
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            panel = (row["n_vector"], row["C"])
            panels[panel][label(row)].append(
                (int(row["K"]), float(row["mean"]), float(row["stddev"]))
            )

    count = len(panels)
    cols = min(count, 2)
    rows = math.ceil(count / cols)
    fig, axes = plt.subplots(
        rows, cols, figsize=(6 * cols, 4 * rows), squeeze=False, sharey=False
    )
    for ax, ((n_vector, c), lines) in zip(axes.flat, sorted(panels.items())):
        for name, points in sorted(lines.items()):
            points.sort()
            ks = [p[0] for p in points]
            means = [p[1] for p in points]
            errs = [p[2] for p in points]
            ax.errorbar(ks, means, yerr=errs, marker="o", ms=3, capsize=2, label=name)
        ax.set_title(f"N={n_vector}, C={c}")
        ax.set_xlabel("K")
        ax.set_ylabel("mean final system fitness")
        ax.legend(fontsize=8)
    for ax in axes.flat[count:]:
        ax.set_visible(False)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
