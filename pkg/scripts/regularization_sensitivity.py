"""Sensitivity of the multiplier to the KKT regularization parameter.

    python3 scripts/regularization_sensitivity.py
"""

import numpy as np

from ymhybrid import lie
from ymhybrid.assembly import Discretization, evolution_rhs
from ymhybrid.dynamics import make_mesh
from ymhybrid.hybrid import build_hybrid_system, solve_hybrid


def main():
    rng = np.random.default_rng(0)
    disc = Discretization(make_mesh("torus", 8, 8), lie.su2())
    A = rng.normal(size=(disc.V1.n_dofs, 3))
    Edot = disc.solve_mass(evolution_rhs(disc, A))
    ref = None
    for scale in (1e-6, 1e-8, 1e-10, 5e-11, 1e-12):
        sol = solve_hybrid(disc, build_hybrid_system(disc, A, Edot, delta_scale=scale), strict=False)
        ref = sol.Hhat if ref is None else ref
        change = np.abs(sol.Hhat - ref).max() / np.abs(ref).max()
        print(f"delta scale {scale:8.0e}: constraint residual {sol.constraint_residual:.2e}, "
              f"objective {sol.objective:.6e}, change vs first {change:.2e}")


if __name__ == "__main__":
    main()
