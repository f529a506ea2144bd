#!/usr/bin/env python3
"""Render a sensitivity boxplot file produced by `losscap sensitivity`.

Usage: plot_boxplots.py boxplot_k200.csv [out.png] [--max-replicates 30]

One box per (portfolio replicate, side), upper bounds in red, lower in blue.
Requires matplotlib.
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("boxplot")
    ap.add_argument("out", nargs="?", default="boxplots.png")
    ap.add_argument("--max-replicates", type=int, default=30)
    args = ap.parse_args()

    samples = defaultdict(list)  # (replicate, side) -> values
    scenario = ""
    with open(args.boxplot) as f:
        for row in csv.DictReader(f):
            scenario = row["scenario"]
            rep = int(row["replicate"])
            if rep < args.max_replicates:
                samples[(rep, row["side"])].append(float(row["sample_value"]))

    reps = sorted({rep for rep, _ in samples})
    fig, ax = plt.subplots(figsize=(10, 4))
    for side, color, offset in (("upper", "red", 0.2), ("lower", "blue", -0.2)):
        data = [samples[(rep, side)] for rep in reps]
        box = ax.boxplot(data, positions=[r + offset for r in reps], widths=0.35,
                         patch_artist=True, showfliers=False)
        for patch in box["boxes"]:
            patch.set_facecolor(color)
            patch.set_alpha(0.5)
    ax.set_xticks(reps)
    ax.set_xticklabels(reps, fontsize=7)
    ax.set_xlabel("portfolio replicate")
    ax.set_ylabel("simulated return level")
    ax.set_title(f"scenario {scenario}")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
