#!/usr/bin/env python3
"""Example plots for fairsel CSV output.

The binary only emits CSV; this script shows how to turn the two main
outputs into figures. It is documentation, not part of the toolchain.

Usage:
    fairsel asymptotic-curve --config configs/two_stage_budget_sweep.json --out curves.csv
    python3 scripts/plot_curves.py curves.csv
"""

import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt


def load(path):
    by_algorithm = defaultdict(list)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            by_algorithm[row["algorithm"]].append(row)
    return by_algorithm


def main(path):
    data = load(path)
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
    for algorithm, rows in sorted(data.items()):
        alpha1 = [float(r["alpha1"]) for r in rows]
        axes[0].plot(alpha1, [float(r["utility"]) for r in rows], label=algorithm)
        axes[1].plot(alpha1, [float(r["x_a"]) for r in rows], label=algorithm)
        axes[2].plot(alpha1, [float(r["gap_vs_oblivious"]) for r in rows], label=algorithm)
    axes[0].set_ylabel("expected utility")
    axes[1].set_ylabel("stage-one fraction of group A")
    axes[2].set_ylabel("gap vs group-oblivious")
    for ax in axes:
        ax.set_xlabel("stage-one budget")
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    out = path.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
