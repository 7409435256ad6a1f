#!/usr/bin/env python3
"""Plot a trace.csv produced by `nkcs trace`.

Usage:
    python3 docs/plot_trace.py nkcs-out/trace.csv [out.png]

One line per species plus the system mean, fitness against generation.
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else "trace.png"

    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        fields = [f for f in reader.fieldnames if f.startswith("fitness_species_")]
        rows = list(reader)

    generations = [int(r["generation"]) for r in rows]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for field in fields:
        label = field.replace("fitness_species_", "species ")
        ax.plot(generations, [float(r[field]) for r in rows], label=label, lw=1)
    ax.plot(
        generations,
        [float(r["system_fitness"]) for r in rows],
        label="system",
        color="black",
        lw=2,
    )
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
