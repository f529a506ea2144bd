#!/usr/bin/env python3
"""Render a bounds-curve CSV produced by `losscap bounds-curve`.

Usage: plot_curves.py curve.csv [out.png] [--scale N]

--scale multiplies the per-summand log bound (e.g. 1000 to plot
1000/n-scaled values). Requires matplotlib.
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

STYLES = {
    "Bennett": dict(color="black", ls="-"),
    "B1": dict(color="tab:blue", ls="-."),
    "B2": dict(color="magenta", ls=":"),
    "B3": dict(color="red", ls="--"),
    "B-lb": dict(color="tab:cyan", ls="-"),
    "B-higher": dict(color="tab:purple", ls="--"),
    "Hoeffding": dict(color="green", ls="-"),
    "Bernstein": dict(color="tab:orange", ls="-"),
    "CLT-approx": dict(color="cyan", ls="-"),
    "mc-lo90": dict(color="gray", ls=":"),
    "mc-hi90": dict(color="gray", ls=":"),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("curve")
    ap.add_argument("out", nargs="?", default="curve.png")
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args()

    series = defaultdict(list)
    with open(args.curve) as f:
        for row in csv.DictReader(f):
            series[row["family"]].append((float(row["t"]), float(row["log_prob_bound"])))

    fig, ax = plt.subplots(figsize=(7, 5))
    for family, points in series.items():
        points.sort()
        ts = [p[0] for p in points]
        vs = [args.scale * p[1] for p in points]
        ax.plot(ts, vs, label=family, **STYLES.get(family, {}))
    ax.set_xlabel("t")
    ax.set_ylabel(f"{args.scale:g}/n · log tail bound" if args.scale != 1 else "1/n · log tail bound")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
