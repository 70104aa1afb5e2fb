import numpy as np
import pytest
import scipy.sparse as sps

from ymhybrid import lie
from ymhybrid.assembly import (Discretization, SolverError, SparseSym, boundary_pairing,
                               evolution_rhs, mass_eps, required_exactness, solve_spd,
                               solve_sym_indefinite)
from ymhybrid.femspace import conforming_dofs_from_edges
from ymhybrid.mesh import structured_square


@pytest.fixture(scope="module")
def unit_u1():
    return Discretization(structured_square(1, 1), lie.u1())


def physical_l2_product(disc, x, y):
    """sum_K int_K u . v dx with u, v evaluated in physical coordinates."""
    from ymhybrid import poly
    pts, w = disc.rule.points, disc.rule.weights
    V = poly.vandermonde(1, pts)
    total = 0.0
    for t in range(disc.mesh.n_triangles):
        Jinv_T = np.linalg.inv(disc.jac[t]).T
        sg = disc.V1.dof_sign[t]
        ux = np.einsum("a,acn,qn->qc", sg * x[disc.V1.dof_map[t]], disc.V1.basis, V) @ Jinv_T.T
        vy = np.einsum("a,acn,qn->qc", sg * y[disc.V1.dof_map[t]], disc.V1.basis, V) @ Jinv_T.T
        total += disc.det[t] * w @ np.einsum("qc,qc->q", ux, vy)
    return total


def test_mass_on_single_cell_is_spd(unit_u1):
    M = unit_u1.mass().matrix.toarray()
    assert M.shape == (10, 10)
    assert np.allclose(M, M.T, atol=1e-15)
    assert np.linalg.eigvalsh(M).min() > 1e-6


def test_mass_matches_physical_quadrature(square3_su2, rng):
    M = square3_su2.mass().matrix
    for _ in range(3):
        x, y = rng.normal(size=(2, square3_su2.V1.n_dofs))
        assert x @ (M @ y) == pytest.approx(physical_l2_product(square3_su2, x, y), rel=1e-12)


def test_mass_flag_and_cache(torus4_su2):
    M = torus4_su2.mass()
    assert M.spd and M is torus4_su2.mass()
    assert M.dim == torus4_su2.V1.n_dofs
    assert mass_eps(torus4_su2).matrix.nnz == M.matrix.nnz


def test_solve_mass_inverts(torus4_su2, rng):
    b = rng.normal(size=(torus4_su2.V1.n_dofs, 3))
    x = torus4_su2.solve_mass(b)
    M = torus4_su2.mass().matrix
    assert np.allclose(M @ (x @ torus4_su2.alg.gram), b, atol=1e-11)


def test_solve_mass_keeps_boundary_zero(square3_su2, rng):
    b = rng.normal(size=(square3_su2.V1.n_dofs, 3))
    x = square3_su2.solve_mass(b)
    assert np.all(x[square3_su2.V1.boundary_dofs] == 0.0)


def test_rhs_of_zero_connection_vanishes(torus4_su2):
    zero = np.zeros((torus4_su2.V1.n_dofs, 3))
    assert np.all(evolution_rhs(torus4_su2, zero) == 0.0)


def test_u1_rhs_is_symmetric_curl_curl(torus4_u1):
    n = torus4_u1.V1.n_dofs
    S = np.column_stack([evolution_rhs(torus4_u1, col[:, None])[:, 0] for col in np.eye(n)])
    assert np.allclose(S, S.T, atol=1e-12)
    assert np.linalg.eigvalsh(S).min() > -1e-10
    # interpolated gradients are curl free, so they lie in the kernel
    def grad(x, y):
        g = np.stack([np.cos(2 * np.pi * x) * np.sin(2 * np.pi * y),
                      np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)], axis=1)
        return 2 * np.pi * g[..., None]
    A = conforming_dofs_from_edges(torus4_u1.V1, torus4_u1.alg, grad, nquad=12)
    assert np.abs(S @ A.coeffs[:, 0]).max() < 1e-10


def test_constant_connection_on_torus_has_zero_u1_rhs(torus4_u1):
    A = conforming_dofs_from_edges(torus4_u1.V1, torus4_u1.alg,
                                   lambda x, y: np.tile([[1.0], [0.5]], (len(x), 1, 1)))
    assert np.abs(evolution_rhs(torus4_u1, A.coeffs)).max() < 1e-13


def test_rhs_is_gauge_equivariant(torus4_su2, rng):
    R = lie.random_rotation(torus4_su2.alg, rng)
    A = rng.normal(size=(torus4_su2.V1.n_dofs, 3))
    lhs = evolution_rhs(torus4_su2, A @ R.T)
    assert np.allclose(lhs, evolution_rhs(torus4_su2, A) @ R.T, atol=1e-12)


def test_rhs_is_cubic_not_linear_for_su2(torus4_su2, rng):
    A = rng.normal(size=(torus4_su2.V1.n_dofs, 3))
    assert not np.allclose(evolution_rhs(torus4_su2, 2 * A), 2 * evolution_rhs(torus4_su2, A))


def test_boundary_pairing_row_sums_follow_stokes(torus4_su2):
    C = boundary_pairing(torus4_su2, 3)
    # the CG basis is a partition of unity, so rows reduce to int curl(phi_a)
    assert np.allclose(C.sum(axis=1), 0.5 * torus4_su2.curl_phi[:, 0], atol=1e-14)


def test_required_exactness():
    assert required_exactness(1, 1) == 4
    assert required_exactness(1, 3) == 8


def test_discretization_rejects_unsupported_degrees():
    mesh = structured_square(2, 2)
    with pytest.raises(ValueError):
        Discretization(mesh, lie.u1(), r=2)
    with pytest.raises(ValueError):
        Discretization(mesh, lie.u1(), s=9)


def test_solve_spd_matches_dense(rng):
    B = rng.normal(size=(8, 8))
    A = B @ B.T + 8 * np.eye(8)
    b = rng.normal(size=8)
    x = solve_spd(SparseSym(sps.csc_matrix(A), True), b)
    assert np.allclose(x, np.linalg.solve(A, b), atol=1e-13)


def test_solve_spd_rejects_singular_and_unflagged():
    singular = SparseSym(sps.csc_matrix(np.diag([1.0, 0.0])), True)
    with pytest.raises(SolverError):
        solve_spd(singular, np.ones(2))
    with pytest.raises(SolverError):
        solve_spd(SparseSym(sps.identity(2, format="csc"), False), np.ones(2))


def test_solve_sym_indefinite(rng):
    K = np.array([[2.0, 1.0], [1.0, -3.0]])
    b = rng.normal(size=2)
    assert np.allclose(solve_sym_indefinite(K, b), np.linalg.solve(K, b))
