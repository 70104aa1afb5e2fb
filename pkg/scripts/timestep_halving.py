"""Drift of the total standard charge under time step refinement.

The total charge sum_K q_K splits into the curl part sum_K int_K d(eps E) and
the bracket part sum_K int_K [A ^ eps E].  The script reports the drift of
both over a fixed horizon for several time steps.

    python3 scripts/timestep_halving.py [--horizon 0.5] [--n 8]
"""

import argparse

import numpy as np

from ymhybrid import lie
from ymhybrid.assembly import Discretization
from ymhybrid.diagnostics import bracket_term, element_charges_std
from ymhybrid.dynamics import make_initial, make_mesh, simulate


def totals(disc, state):
    return (element_charges_std(disc, state.A, state.E).sum(axis=0),
            bracket_term(disc, state.A, state.E).sum(axis=0))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--horizon", type=float, default=0.5)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--dts", type=float, nargs="+", default=[0.01, 0.005, 0.0025])
    args = p.parse_args()
    for domain in ("torus", "square"):
        for scenario in ("su2_bump", "random"):
            disc = Discretization(make_mesh(domain, args.n, args.n), lie.su2())
            drifts = []
            for dt in args.dts:
                start = make_initial(disc, scenario, 1.0, 0)
                total0, br0 = totals(disc, start)
                steps = int(round(args.horizon / dt))
                final, _ = simulate(disc, start, dt, steps, output_every=steps or 1)
                total1, br1 = totals(disc, final)
                drifts.append(np.linalg.norm(total1 - total0))
                print(f"{domain:6} {scenario:8} dt={dt:<7g} total drift {drifts[-1]:.3e}  "
                      f"bracket drift {np.linalg.norm(br1 - br0):.3e}")
            ratios = [a / b if b else float("inf") for a, b in zip(drifts, drifts[1:])]
            print(f"{'':15} successive ratios {', '.join(f'{r:.2f}' for r in ratios)}")


if __name__ == "__main__":
    main()
