"""Fast invariant checks behind the ``selftest`` command."""

import time
from dataclasses import dataclass

import numpy as np

from . import calculus as calc
from . import identities, lie, poly
from .assembly import Discretization
from .femspace import Field, _edge_moment_functionals, lagrange_basis, lagrange_nodes, p1_edge_basis
from .quadrature import quadrature


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    seconds: float


def check_lie(rng):
    worst = 0.0
    for alg in (lie.su2(), lie.u1()):
        worst = max(worst, *lie.structure_defects(alg).values())
    return worst


def check_identities(rng, rounds=4):
    """Graded Leibniz, commutativity, Jacobi, d_A^2 = [F ^ .] and friends."""
    defects, _ = identities.check_all(rng, rounds=rounds)
    return max(defects.values())


def check_stokes(rng, trials=40):
    rule = quadrature(8)
    worst = 0.0
    for _ in range(trials):
        u = identities.FormSampler(rng, lie.su2())(1, 4)
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]) + rng.uniform(-0.2, 0.2, (3, 2))
        vol = calc.integrate_element(calc.exterior_d(u), rule, tri)
        bnd = calc.integrate_boundary(u, rule, tri)
        worst = max(worst, float(np.abs(vol - bnd).max()))
    return worst


def check_unisolvence(rng):
    L = _edge_moment_functionals(1, quadrature(4))
    B = p1_edge_basis().reshape(6, -1)
    worst = float(np.abs(L @ B.T - np.eye(6)).max())
    for s in (1, 2, 3):
        V = poly.vandermonde(s, lagrange_nodes(s))
        worst = max(worst, float(np.abs(lagrange_basis(s) @ V.T - np.eye(len(V))).max()))
    return worst


def check_conformity(mesh_factory, rng):
    from .diagnostics import conformity_residual
    disc = Discretization(mesh_factory("torus", 4, 4), lie.su2())
    A = Field(disc.V1, disc.alg, rng.normal(size=(disc.V1.n_dofs, 3)))
    return conformity_residual(disc, A)


def check_conservation(mesh_factory, rng, steps=10):
    from .dynamics import make_initial, simulate
    disc = Discretization(mesh_factory("torus", 4, 4), lie.su2())
    state = make_initial(disc, "random", 1.0, int(rng.integers(1 << 31)))
    _, records = simulate(disc, state, 0.01, steps)
    return max(r.max_abs_Q_drift for r in records)


def run_checks(inject_sign_fault: bool = False, seed: int = 12345):
    """Run every check; returns a list of ``CheckResult``."""
    from .dynamics import make_mesh, with_sign_fault

    def mesh_factory(domain, nx, ny):
        mesh = make_mesh(domain, nx, ny)
        return with_sign_fault(mesh) if inject_sign_fault else mesh

    rng = np.random.default_rng(seed)
    checks = [
        ("lie algebra identities", lambda: check_lie(rng), 1e-14),
        ("graded form identities", lambda: check_identities(rng), 1e-12),
        ("stokes on random triangles", lambda: check_stokes(rng), 1e-12),
        ("unisolvence of local bases", lambda: check_unisolvence(rng), 1e-12),
        ("tangential conformity", lambda: check_conformity(mesh_factory, rng), 1e-12),
        ("per-element charge conservation", lambda: check_conservation(mesh_factory, rng), 1e-9),
    ]
    results = []
    for name, fn, tol in checks:
        t0 = time.perf_counter()
        try:
            value = float(fn())
            ok = bool(np.isfinite(value) and value <= tol)
        except Exception:  # a crashing check is a failed check
            value, ok = float("nan"), False
        results.append(CheckResult(name, ok, value, tol, time.perf_counter() - t0))
    return results


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  status  {'value':>10}  {'tol':>8}  time"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status:<6}  {r.value:>10.3e}  {r.tolerance:>8.0e}  {r.seconds:.2f}s")
    return "\n".join(lines)
