import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ymhybrid import lie
from ymhybrid import diagnostics as dg
from ymhybrid.assembly import Discretization
from ymhybrid.dynamics import make_initial, with_sign_fault
from ymhybrid.femspace import Field, conforming_dofs_from_edges
from ymhybrid.hybrid import dhat_init
from ymhybrid.mesh import structured_square


def random_fields(disc, rng, zero_boundary=True):
    A, E = rng.normal(size=(2, disc.V1.n_dofs, disc.m))
    if zero_boundary:
        A[disc.V1.boundary_dofs] = E[disc.V1.boundary_dofs] = 0.0
    return Field(disc.V1, disc.alg, A), Field(disc.V1, disc.alg, E)


def test_l2_projection_examples(su2):
    assert dg.l2_pc_projection(np.zeros((4, 3)), np.full(4, 0.25), su2.gram) == 0.0
    assert dg.l2_pc_projection([[0.0, 0.0, 0.5]], [0.5], su2.gram) == pytest.approx(0.5)


# scale factors whose square underflows are excluded
@given(arrays(np.float64, (5, 3), elements=st.floats(-10, 10)),
       st.floats(-100, 100).filter(lambda c: c == 0 or abs(c) > 1e-100))
def test_l2_projection_is_homogeneous(Q, c):
    G, areas = lie.su2().gram, np.linspace(0.1, 0.5, 5)
    base = dg.l2_pc_projection(Q, areas, G)
    assert dg.l2_pc_projection(c * Q, areas, G) == pytest.approx(abs(c) * base, rel=1e-12, abs=1e-300)


def test_zero_state_diagnostics(torus4_su2):
    z = Field.zeros(torus4_su2.V1, torus4_su2.alg)
    D = Field.zeros(torus4_su2.VD, torus4_su2.alg)
    assert np.all(dg.element_charges_hat(torus4_su2, z, z, D) == 0)
    assert np.all(dg.element_charges_std(torus4_su2, z, z) == 0)
    assert dg.energy(torus4_su2, z, z) == 0.0
    assert dg.conformity_residual(torus4_su2, z) == 0.0


def test_energy_example_u1():
    disc = Discretization(structured_square(3, 3), lie.u1())
    A = conforming_dofs_from_edges(disc.V1, disc.alg, lambda x, y: np.stack(
        [np.zeros((len(x), 1)), x[:, None]], axis=1), zero_boundary=False)
    assert dg.energy(disc, A, Field.zeros(disc.V1, disc.alg)) == pytest.approx(0.5, abs=1e-13)


def test_energy_is_nonnegative(torus4_su2, rng):
    for _ in range(5):
        A, E = random_fields(torus4_su2, rng)
        assert dg.energy(torus4_su2, A, E) >= 0.0


def test_electric_energy_matches_mass_matrix(torus4_su2, rng):
    A, E = random_fields(torus4_su2, rng)
    z = Field.zeros(torus4_su2.V1, torus4_su2.alg)
    M = torus4_su2.mass().matrix
    expect = 0.5 * np.einsum("im,ij,jn,mn->", E.coeffs, M.toarray(), E.coeffs, torus4_su2.alg.gram)
    assert dg.energy(torus4_su2, z, E) == pytest.approx(expect, rel=1e-12)


def test_standard_equals_hybrid_charge_initially(square3_su2, rng):
    A, E = random_fields(square3_su2, rng)
    D = dhat_init(square3_su2, E)
    hat = dg.element_charges_hat(square3_su2, A, E, D)
    std = dg.element_charges_std(square3_su2, A, E)
    assert np.abs(hat - std).max() <= 1e-13
    assert np.abs(std).max() > 1e-3


def test_abelian_charge_is_boundary_flux(torus4_u1, rng):
    A, E = random_fields(torus4_u1, rng)
    D = dhat_init(torus4_u1, E)
    assert np.allclose(dg.element_charges_hat(torus4_u1, A, E, D), dg.boundary_flux(torus4_u1, D),
                       atol=1e-15)
    assert np.all(dg.bracket_term(torus4_u1, A, E) == 0.0)


def test_stokes_mismatch_is_detected(torus4_su2, rng, monkeypatch):
    D = Field(torus4_su2.VD, torus4_su2.alg, rng.normal(size=(torus4_su2.VD.n_dofs, 3)))
    dg.boundary_flux(torus4_su2, D)
    original = dg._curl_functional
    monkeypatch.setattr(dg, "_curl_functional", lambda q: original(q) + 1e-6)
    with pytest.raises(dg.StokesMismatch):
        dg.boundary_flux(torus4_su2, D)
    dg.boundary_flux(torus4_su2, D, check=False)


def test_charges_rotate_with_the_state(torus4_su2, rng):
    A, E = random_fields(torus4_su2, rng)
    D = dhat_init(torus4_su2, E)
    R = lie.random_rotation(torus4_su2.alg, rng)
    Q = dg.element_charges_hat(torus4_su2, A, E, D)
    QR = dg.element_charges_hat(torus4_su2, A.rotated(R), E.rotated(R), D.rotated(R))
    assert np.abs(QR - Q @ R.T).max() <= 1e-12
    q = dg.element_charges_std(torus4_su2, A, E)
    assert np.abs(dg.element_charges_std(torus4_su2, A.rotated(R), E.rotated(R)) - q @ R.T).max() <= 1e-12


def test_conformity_examples(torus4_su2, rng):
    A, _ = random_fields(torus4_su2, rng)
    assert dg.conformity_residual(torus4_su2, A) <= 1e-13
    faulty = Discretization(with_sign_fault(torus4_su2.mesh), torus4_su2.alg)
    A_bad = Field(faulty.V1, faulty.alg, A.coeffs)
    assert dg.conformity_residual(faulty, A_bad) > 1e-3


def test_record_fields(torus4_su2):
    state = make_initial(torus4_su2, "random", 1.0, seed=4)
    rec = dg.make_record(torus4_su2, state, state.Q0)
    assert rec.step == 0 and rec.time == 0.0
    assert rec.max_abs_Q_drift == 0.0
    assert rec.l2_rho_avg == pytest.approx(rec.l2_rhohat_avg, rel=1e-12)
    G = torus4_su2.alg.gram
    assert rec.global_charge_norm == pytest.approx(np.sqrt(rec.global_charge @ G @ rec.global_charge))
    assert len(rec.csv_values()) == 8
    assert all(np.isfinite(v) for v in rec.csv_values())


def test_single_element_accessors(torus4_su2):
    state = make_initial(torus4_su2, "random", 1.0, seed=9)
    k = 5
    assert np.array_equal(dg.element_charge_hat(torus4_su2, state, k), state.Q0[k])
    std = dg.element_charges_std(torus4_su2, state.A, state.E)[k]
    assert np.array_equal(dg.element_charge_std(torus4_su2, state, k), std)
