#!/usr/bin/env python3
"""Render a cutoff-scaling CSV (columns: cutoff,value,stderr) to a log-log
figure with error bars and a fitted-slope annotation.

Usage: python plots/scaling.py <input.csv> <output.png>

Exits nonzero with a message naming the file and the problem when the CSV
does not match the expected contract.
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

EXPECTED = ("cutoff", "value", "stderr")


def load_scaling_csv(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SystemExit(f"{path}: empty file")
            rows = list(reader)
    except OSError as exc:
        raise SystemExit(f"{path}: {exc.strerror}")
    # accept the sweep variant whose first column is the axis name
    if tuple(header) != EXPECTED and tuple(header[:3]) != ("Lambda", "value",
                                                           "stderr"):
        raise SystemExit(
            f"{path}: expected columns {','.join(EXPECTED)}, "
            f"got {','.join(header)}")
    if not rows:
        raise SystemExit(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in row[:3]] for row in rows])
    except (ValueError, IndexError):
        raise SystemExit(f"{path}: non-numeric or short data row")
    if np.any(data[:, 0] <= 0):
        raise SystemExit(f"{path}: cutoffs must be positive")
    return data[:, 0], data[:, 1], data[:, 2]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", help="cutoff-probe CSV")
    parser.add_argument("output", help="output image path")
    args = parser.parse_args(argv)

    cutoff, value, stderr = load_scaling_csv(args.input)

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.errorbar(cutoff, value, yerr=stderr, fmt="o-", capsize=3,
                color="tab:blue")
    ax.set_xscale("log")
    positive = value > 0
    if np.all(positive):
        ax.set_yscale("log")
    slope = float("nan")
    if np.count_nonzero(positive) >= 2:
        slope = float(np.polyfit(np.log(cutoff[positive]),
                                 np.log(value[positive]), 1)[0])
        ax.annotate(f"log-log slope = {slope:.3f}",
                    xy=(0.05, 0.92), xycoords="axes fraction")
    ax.set_xlabel(r"cutoff $\Lambda$")
    ax.set_ylabel(r"$\|M\|_{HS}^2$ estimate")
    ax.set_title("Pair-kernel norm vs momentum cutoff")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    return 0


if __name__ == "__main__":
    sys.exit(main())
