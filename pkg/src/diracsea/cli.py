"""Command-line entry point.

    diracsea run <config.json> [--out DIR] [--seed N] [--threads N] [--render]
    diracsea sweep <config.json> --axis NAME --values v1,v2,... [...]

Exit codes: 0 success, 2 config/schema violation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path

from .harness import SWEEP_AXES, execute

# optional report rendering: delegates to the plotting scripts when the
# repository ships them; the library itself never imports matplotlib
_RENDERERS = {
    "cutoff-probe": "scaling.py",
    "tangential-probe": "scaling.py",
    "spectrum": "spectrum.py",
}


def _add_common(sub):
    sub.add_argument("config", help="path to the JSON experiment config")
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the sampler seed")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads for sweep sub-runs")
    sub.add_argument("--render", action="store_true",
                     help="render figures via the plots/ scripts if present")


def _parse_values(raw: str):
    values = []
    for tok in raw.split(","):
        tok = tok.strip()
        if tok:
            values.append(float(tok))
    return values


def _render(out_dir: str) -> None:
    plots_dir = Path(__file__).resolve().parents[2] / "plots"
    if not plots_dir.is_dir():
        print("render skipped: plots/ scripts not installed", file=sys.stderr)
        return
    for csv_path in sorted(Path(out_dir).glob("*.csv")):
        stem = csv_path.stem.removeprefix("sweep-")
        script = _RENDERERS.get(stem)
        if script is None:
            continue
        png = csv_path.with_suffix(".png")
        proc = subprocess.run(
            [sys.executable, str(plots_dir / script), str(csv_path), str(png)])
        if proc.returncode != 0:
            print(f"render failed for {csv_path.name}", file=sys.stderr)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="diracsea",
        description="desk-scale external-field QED experiments")
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run one experiment from a config")
    _add_common(run)

    sweep = subs.add_parser("sweep", help="sweep one axis of an experiment")
    _add_common(sweep)
    sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sweep.add_argument("--values", required=True,
                       help="comma-separated axis values")

    args = parser.parse_args(argv)
    if args.command == "sweep":
        values = _parse_values(args.values)
        code = execute(args.config, args.out, seed=args.seed,
                       threads=args.threads, sweep_axis=args.axis,
                       sweep_values=values)
    else:
        code = execute(args.config, args.out, seed=args.seed,
                       threads=args.threads)
    if code == 0 and args.render:
        _render(args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
