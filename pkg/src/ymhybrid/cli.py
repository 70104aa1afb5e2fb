"""Command line driver: ``run``, ``selftest`` and ``print-config``.

Exit status: 0 success, 1 configuration error, 2 runtime or solver failure,
3 self-test failure.
"""

import argparse
import sys
from pathlib import Path

from .assembly import SolverError
from .config import ConfigError, RunConfig, load_config, parse_config
from .diagnostics import StokesMismatch

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_SELFTEST = 0, 1, 2, 3

TIMESERIES_HEADER = ("step,time,l2_rho_avg,l2_rhohat_avg,max_abs_Q_drift,"
                     "global_charge_norm,energy,constraint_residual")
PER_ELEMENT_HEADER = "step,element,layer,Q"


def fmt(x) -> str:
    """17 significant digits, so every float round-trips exactly."""
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.17g}"


PLOT_SCRIPT = """\
# gnuplot script: per-element charge norms versus time
set datafile separator ','
set key top left
set logscale y
set format y '%.0e'
set xlabel 'time'
set ylabel 'L2 norm of element-averaged charge'
set terminal pngcairo size 900,600
set output 'charge.png'
plot 'charge_timeseries.csv' using 2:(abs($3)+1e-300) skip 1 with lines title 'standard charge', \\
     'charge_timeseries.csv' using 2:(abs($4)+1e-300) skip 1 with lines title 'hybrid charge'
"""


def write_outputs(config: RunConfig, out_dir: Path, disc, records, per_element):
    """Write the time series, per-element charges, plot script and mesh dump."""
    from .mesh import dump
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [TIMESERIES_HEADER] + [",".join(fmt(v) for v in r.csv_values()) for r in records]
    (out_dir / "charge_timeseries.csv").write_text("\n".join(rows) + "\n")
    if config.per_element_csv:
        lines = [PER_ELEMENT_HEADER]
        for step, Q in per_element:
            for k, row in enumerate(Q):
                lines.extend(f"{step},{k},{layer},{fmt(q)}" for layer, q in enumerate(row))
        (out_dir / "per_element_charge.csv").write_text("\n".join(lines) + "\n")
    (out_dir / "plot.gp").write_text(PLOT_SCRIPT)
    dump(disc.mesh, out_dir / "mesh.txt")


def cmd_run(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    from .diagnostics import element_charges_hat
    from .dynamics import run

    per_element = []

    def collect(disc, state, record):
        if config.per_element_csv:
            per_element.append((state.step, element_charges_hat(disc, state.A, state.E, state.Dhat)))

    disc, final, records = run(config, callback=collect)
    write_outputs(config, Path(config.output_dir), disc, records, per_element)
    last = records[-1]
    print(f"wrote {len(records)} records to {config.output_dir}; final l2_rho_avg={last.l2_rho_avg:.3e} "
          f"l2_rhohat_avg={last.l2_rhohat_avg:.3e} max_abs_Q_drift="
          f"{max(r.max_abs_Q_drift for r in records):.3e}", file=out)
    return EXIT_OK


def cmd_selftest(inject_sign_fault: bool = False, out=None) -> int:
    out = out or sys.stdout
    from .selftest import format_table, run_checks
    results = run_checks(inject_sign_fault=inject_sign_fault)
    print(format_table(results), file=out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ymhybrid", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a simulation from a key = value config file")
    r.add_argument("--config", required=True)
    r.add_argument("--output-dir")
    s = sub.add_parser("selftest", help="run the invariant self test")
    s.add_argument("--inject-sign-fault", action="store_true", help=argparse.SUPPRESS)
    c = sub.add_parser("print-config", help="print the effective configuration")
    c.add_argument("--config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest(args.inject_sign_fault)
    try:
        config = load_config(args.config) if args.config else parse_config("")
        if getattr(args, "output_dir", None):
            config = config.replace(output_dir=args.output_dir)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "print-config":
        sys.stdout.write(config.dumps())
        return EXIT_OK
    try:
        return cmd_run(config)
    except (SolverError, StokesMismatch, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
