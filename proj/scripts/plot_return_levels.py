#!/usr/bin/env python3
"""Render a return-level report produced by `losscap run`.

Usage: plot_return_levels.py report.csv [out.png] [--relative]

Plots the conservative point bracket and 95% prediction interval per return
period, plus the baseline when present. --relative normalizes everything by
the baseline point estimate. Requires matplotlib.
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("report")
    ap.add_argument("out", nargs="?", default="return_levels.png")
    ap.add_argument("--relative", action="store_true")
    args = ap.parse_args()

    rows = []
    with open(args.report) as f:
        for row in csv.DictReader(f):
            rows.append(row)
    rows.sort(key=lambda r: int(r["k"]))

    ks = [int(r["k"]) for r in rows]
    have_base = all(r["baseline_point"] for r in rows)
    if args.relative and not have_base:
        raise SystemExit("--relative needs baseline columns in the report")

    def series(col):
        return [float(r[col]) for r in rows]

    norm = series("baseline_point") if args.relative else [1.0] * len(rows)

    def rel(vals):
        if not args.relative:
            return vals
        return [(v - b) / b for v, b in zip(vals, norm)]

    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(ks, rel(series("point_upper")), "o-", color="red", label="upper point (F+)")
    ax.plot(ks, rel(series("pi_high")), "^--", color="red", alpha=0.6, label="97.5% (F+)")
    ax.plot(ks, rel(series("point_lower")), "o-", color="blue", label="lower point (F-)")
    ax.plot(ks, rel(series("pi_low")), "v--", color="blue", alpha=0.6, label="2.5% (F-)")
    if have_base:
        ax.plot(ks, rel(series("baseline_point")), "s-", color="black", label="standard point")
        ax.plot(ks, rel(series("baseline_lo")), ":", color="black", alpha=0.7)
        ax.plot(ks, rel(series("baseline_hi")), ":", color="black", alpha=0.7)
    ax.set_xscale("log")
    if not args.relative:
        ax.set_yscale("log")
    ax.set_xlabel("return period k (years)")
    ax.set_ylabel("relative to standard point" if args.relative else "loss level")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
