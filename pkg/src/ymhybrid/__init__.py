"""Hybrid finite element simulation of the temporal-gauge Yang-Mills equations in 2D.

The scheme evolves a curl-conforming connection A and electric field E with a
leapfrog integrator, and carries a broken flux Dhat updated through hybrid
multipliers so that the charge in every element is conserved exactly.
"""

from .assembly import Discretization, SolverError
from .config import ConfigError, RunConfig, parse_config
from .diagnostics import DiagnosticsRecord
from .dynamics import SCENARIOS, SimState, leapfrog_step, make_initial, make_mesh, run, simulate
from .lie import LieAlgebra, su2, u1

__version__ = "0.1.0"

__all__ = [
    "Discretization", "SolverError", "ConfigError", "RunConfig", "parse_config", "DiagnosticsRecord",
    "SCENARIOS", "SimState", "leapfrog_step", "make_initial", "make_mesh", "run", "simulate",
    "LieAlgebra", "su2", "u1",
]
