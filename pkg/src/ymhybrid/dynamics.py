"""Leapfrog time stepping of the hybrid scheme, initial data and the run loop."""

import dataclasses
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import lie
from .assembly import Discretization, SolverError, evolution_rhs
from .diagnostics import DiagnosticsRecord, element_charges_hat, make_record
from .femspace import Field, conforming_dofs_from_edges
from .hybrid import build_hybrid_system, dhat_init, dhat_step, solve_hybrid
from .mesh import Mesh, structured_square


class InstabilityError(SolverError):
    """Non-finite values appeared during time stepping."""


@dataclass
class SimState:
    t: float
    step: int
    A: Field
    E: Field
    Dhat: Field
    Hhat: Optional[np.ndarray] = None  # multiplier of the last half step
    Q0: Optional[np.ndarray] = None  # reference hybrid charges (T, m)
    constraint_residual: float = 0.0

    def rotated(self, R) -> "SimState":
        R = np.asarray(R)
        return dataclasses.replace(
            self, A=self.A.rotated(R), E=self.E.rotated(R), Dhat=self.Dhat.rotated(R),
            Hhat=None if self.Hhat is None else self.Hhat @ R.T,
            Q0=None if self.Q0 is None else self.Q0 @ R.T)


# ---------------------------------------------------------------- scenarios

@dataclass(frozen=True)
class Scenario:
    """Closed-form initial data ``(A0, E0)``; each maps (x, y) to (npts, 2, m)."""

    name: str
    description: str
    build: Callable  # (alg, amplitude, rng) -> (A0, E0 or None)


def _bump_profile(x, y):
    return np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)


def _su2_bump(alg, a, rng):
    second = 1 % alg.dim  # e_2, or e_1 again for the abelian algebra

    def A0(x, y):
        out = np.zeros((len(x), 2, alg.dim))
        p = a * _bump_profile(x, y)
        out[:, 0, 0] += p
        out[:, 1, second] += p
        return out
    return A0, None


def _u1_wave(alg, a, rng):
    def A0(x, y):
        out = np.zeros((len(x), 2, alg.dim))
        out[:, 1, 0] = a * np.sin(2 * np.pi * x)
        return out
    return A0, None


def _random_modes(alg, a, rng, nmodes=3):
    """Smooth random 1-form vanishing tangentially on the square's boundary."""
    amp = rng.normal(size=(nmodes, 2, alg.dim))
    k = rng.integers(0, 3, size=(nmodes, 2))
    phase = rng.uniform(0, 2 * np.pi, size=nmodes)

    def field_(x, y):
        env = _bump_profile(x, y)
        out = np.zeros((len(x), 2, alg.dim))
        for j in range(nmodes):
            wave = np.cos(2 * np.pi * (k[j, 0] * x + k[j, 1] * y) + phase[j])
            out += (env * wave)[:, None, None] * amp[j][None]
        return a * out
    return field_


def _random(alg, a, rng):
    return _random_modes(alg, a, rng), _random_modes(alg, 0.5 * a, rng)


SCENARIOS = {
    "zero": Scenario("zero", "A0 = 0, E0 = 0", lambda alg, a, rng: (None, None)),
    "su2_bump": Scenario(
        "su2_bump", "A0 = a sin(2 pi x) sin(2 pi y) (dx e_1 + dy e_2), E0 = 0", _su2_bump),
    "u1_wave": Scenario("u1_wave", "A0 = a sin(2 pi x) dy e_1, E0 = 0", _u1_wave),
    "random": Scenario(
        "random", "seeded smooth random A0 and E0 (nonzero initial charge)", _random),
}


def make_mesh(domain: str, nx: int, ny: int) -> Mesh:
    if domain not in ("square", "torus"):
        raise ValueError(f"unknown domain {domain!r}")
    return structured_square(nx, ny, periodic=domain == "torus")


def make_initial(disc: Discretization, scenario: str, amplitude: float = 1.0, seed: int = 0) -> SimState:
    """Interpolate a scenario into the conforming space and record reference charges."""
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; known: {sorted(SCENARIOS)}")
    rng = np.random.default_rng(seed)
    A0, E0 = SCENARIOS[scenario].build(disc.alg, amplitude, rng)

    def interp(f):
        if f is None:
            return Field.zeros(disc.V1, disc.alg)
        return conforming_dofs_from_edges(disc.V1, disc.alg, lambda x, y: f(x, y))

    A, E = interp(A0), interp(E0)
    state = SimState(0.0, 0, A, E, dhat_init(disc, E))
    state.Q0 = element_charges_hat(disc, A, E, state.Dhat)
    return state


# ------------------------------------------------------------------ stepping


def cfl_limit(mesh: Mesh) -> float:
    return mesh.min_edge_length() / 4.0


def leapfrog_step(disc: Discretization, state: SimState, dt: float, weights=(1.0, 1.0),
                  delta_scale: float = 1e-10, strict: bool = True) -> SimState:
    """One step of the staggered scheme; a negative dt steps backward in time."""
    alg = disc.alg
    A, E = state.A.coeffs, state.E.coeffs
    A_mid = A - 0.5 * dt * E
    Edot = disc.solve_mass(evolution_rhs(disc, A_mid))
    sys_ = build_hybrid_system(disc, A_mid, Edot, weights=weights, delta_scale=delta_scale)
    sol = solve_hybrid(disc, sys_, strict=strict)
    E_new = E + dt * Edot
    Dhat_new = dhat_step(disc, state.Dhat, A_mid, sol.Hhat, dt)
    A_new = A_mid - 0.5 * dt * E_new

    step = state.step + (1 if dt > 0 else -1)
    for name, arr in (("A", A_new), ("E", E_new), ("Dhat", Dhat_new.coeffs)):
        if not np.all(np.isfinite(arr)):
            raise InstabilityError(f"non-finite {name} at step {step}")
    return SimState(step * abs(dt), step, Field(disc.V1, alg, A_new), Field(disc.V1, alg, E_new),
                    Dhat_new, sol.Hhat, state.Q0, sol.constraint_residual)


def simulate(disc: Discretization, state: SimState, dt: float, steps: int, output_every: int = 1,
             weights=(1.0, 1.0), delta_scale: float = 1e-10, strict: bool = True,
             callback=None):
    """Advance ``steps`` steps, returning the final state and the diagnostics series.

    ``callback(state, record)`` is called at every output step.
    """
    if abs(dt) > cfl_limit(disc.mesh):
        warnings.warn(f"dt = {dt:g} exceeds the conservative stability guard h/4 = "
                      f"{cfl_limit(disc.mesh):g}", RuntimeWarning, stacklevel=2)
    records = []

    def emit(st):
        rec = make_record(disc, st, st.Q0)
        records.append(rec)
        if callback is not None:
            callback(st, rec)

    emit(state)
    for n in range(1, steps + 1):
        try:
            state = leapfrog_step(disc, state, dt, weights, delta_scale, strict)
        except SolverError as exc:
            raise type(exc)(f"step {n}: {exc}") from exc
        if n % output_every == 0 or n == steps:
            emit(state)
    return state, records


def run(config, callback=None):
    """Build everything from a ``RunConfig`` and simulate; returns (disc, final state, records).

    ``callback(disc, state, record)`` is called at every output step.
    """
    mesh = make_mesh(config.domain, config.nx, config.ny)
    if config.inject_sign_fault:
        mesh = with_sign_fault(mesh)
    disc = Discretization(mesh, lie.by_name(config.algebra), config.degree_r, config.degree_s)
    state = make_initial(disc, config.scenario, config.amplitude, config.seed)
    hook = None if callback is None else (lambda st, rec: callback(disc, st, rec))
    final, records = simulate(disc, state, config.dt, config.steps, config.output_every,
                              config.weights, config.kkt_delta, callback=hook)
    return disc, final, records


def with_sign_fault(mesh: Mesh, triangle: int = 0, local_edge: int = 0) -> Mesh:
    """Copy of ``mesh`` with one edge orientation sign flipped (fault injection)."""
    signs = np.array(mesh.tri_edge_signs)
    signs[triangle, local_edge] *= -1.0
    signs.setflags(write=False)
    return dataclasses.replace(mesh, tri_edge_signs=signs)


__all__ = [
    "SimState", "Scenario", "SCENARIOS", "InstabilityError", "make_mesh", "make_initial",
    "leapfrog_step", "simulate", "run", "cfl_limit", "with_sign_fault", "DiagnosticsRecord",
]
