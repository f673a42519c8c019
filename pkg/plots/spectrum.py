#!/usr/bin/env python3
"""Render a pair-spectrum CSV (columns: mode_i,mode_j,probability) to a
heat-map of pair-creation probabilities over mode labels.

Usage: python plots/spectrum.py <input.csv> <output.png>

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

EXPECTED = ("mode_i", "mode_j", "probability")


def load_spectrum_csv(path):
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
    if tuple(header) != EXPECTED:
        raise SystemExit(
            f"{path}: expected columns {','.join(EXPECTED)}, "
            f"got {','.join(header)}")
    if not rows:
        raise SystemExit(f"{path}: no data rows")
    try:
        ii = np.array([int(row[0]) for row in rows])
        jj = np.array([int(row[1]) for row in rows])
        prob = np.array([float(row[2]) for row in rows])
    except (ValueError, IndexError):
        raise SystemExit(f"{path}: malformed data row")
    if np.any(prob < 0):
        raise SystemExit(f"{path}: negative probability")
    return ii, jj, prob


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", help="spectrum CSV")
    parser.add_argument("output", help="output image path")
    args = parser.parse_args(argv)

    ii, jj, prob = load_spectrum_csv(args.input)
    ni, nj = ii.max() + 1, jj.max() + 1
    grid = np.zeros((ni, nj))
    grid[ii, jj] = prob

    fig, ax = plt.subplots(figsize=(6, 5))
    floor = max(prob[prob > 0].min() if np.any(prob > 0) else 1e-30, 1e-30)
    image = ax.imshow(np.log10(np.maximum(grid, floor * 1e-2)),
                      origin="lower", aspect="auto", cmap="viridis")
    fig.colorbar(image, ax=ax, label=r"$\log_{10}$ probability")
    ax.set_xlabel("hole mode $j$")
    ax.set_ylabel("electron mode $i$")
    total = float(prob.sum())
    ax.set_title(f"Pair spectrum (one-pair sector total = {total:.3e})")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    return 0


if __name__ == "__main__":
    sys.exit(main())
