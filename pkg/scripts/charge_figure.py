"""Hybrid versus standard charge over a run, on both domains.

Writes the usual CLI outputs (CSV files, gnuplot script, mesh) for each
config under scripts/configs and prints the final charge norms.

    python3 scripts/charge_figure.py [--steps N] [--out DIR]
"""

import argparse
from pathlib import Path

from ymhybrid.cli import cmd_run
from ymhybrid.config import load_config

HERE = Path(__file__).resolve().parent


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, help="override the step count of every config")
    p.add_argument("--out", default="output", help="parent directory for the run outputs")
    p.add_argument("configs", nargs="*", default=["torus_su2.cfg", "square_su2.cfg"])
    args = p.parse_args()
    for name in args.configs:
        cfg = load_config(HERE / "configs" / name)
        changes = {"output_dir": str(Path(args.out) / Path(name).stem)}
        if args.steps is not None:
            changes["steps"] = args.steps
        print(f"[{name}]", end=" ", flush=True)
        cmd_run(cfg.replace(**changes))


if __name__ == "__main__":
    main()
