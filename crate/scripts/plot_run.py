#!/usr/bin/env python3
"""Plot the curves of a run directory written by `sqzd simulate` or `sqzd sweep`.

usage: plot_run.py RUN_DIR [--out figure.png]
"""
import argparse
import csv
import json
from pathlib import Path

import matplotlib.pyplot as plt


def column(rows, name):
    return [float(r[name]) if r[name] else float("nan") for r in rows]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("run_dir", type=Path)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    manifest = json.loads((args.run_dir / "manifest.json").read_text())
    fig, (ax_mean, ax_sd, ax_acc) = plt.subplots(1, 3, figsize=(15, 4.5))
    for curve in manifest["curves"]:
        with open(args.run_dir / curve["file"]) as f:
            rows = list(csv.DictReader(f))
        m = column(rows, "m")
        line, = ax_mean.plot(m, column(rows, "mean"), "--", label=curve["label"])
        ax_mean.plot(m, column(rows, "analytic_mean"), color=line.get_color())
        ax_sd.plot(m, column(rows, "stddev"), "--", color=line.get_color())
        ax_sd.plot(m, column(rows, "analytic_stddev"), color=line.get_color())
        ax_acc.plot(m, column(rows, "accum_stddev"), "--", color=line.get_color())

    ax_mean.set(xlabel="m", ylabel="⟨P(m)⟩")
    ax_sd.set(xlabel="m", ylabel="ΔP(m)")
    ax_acc.set(xlabel="m", ylabel="D(m)")
    ax_mean.legend()
    fig.suptitle(f"{manifest['name']}: dashed Monte Carlo, solid closed form")
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
