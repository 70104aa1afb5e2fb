import warnings

import numpy as np
import pytest

from ymhybrid import dynamics as dyn
from ymhybrid import lie
from ymhybrid.config import RunConfig
from ymhybrid.diagnostics import element_charges_hat
from ymhybrid.femspace import Field


def test_zero_state_is_a_fixed_point(torus4_su2):
    state = dyn.make_initial(torus4_su2, "zero")
    final, records = dyn.simulate(torus4_su2, state, 0.01, 5)
    for f in ("A", "E", "Dhat"):
        assert np.all(getattr(final, f).coeffs == 0.0)
    assert all(r.energy == 0.0 and r.max_abs_Q_drift == 0.0 for r in records)


def test_one_step_keeps_hybrid_charges(torus4_su2):
    state = dyn.make_initial(torus4_su2, "su2_bump")
    after = dyn.leapfrog_step(torus4_su2, state, 0.01)
    Q = element_charges_hat(torus4_su2, after.A, after.E, after.Dhat)
    assert np.abs(Q - state.Q0).max() <= 1e-10
    assert after.step == 1 and after.t == 0.01
    assert after.constraint_residual <= 1e-8


@pytest.mark.parametrize("fixture", ["torus4_su2", "square3_su2"])
def test_time_reversal(request, fixture):
    disc = request.getfixturevalue(fixture)
    start = dyn.make_initial(disc, "random", 1.0, seed=11)
    state, _ = dyn.simulate(disc, start, 0.01, 15)
    back, _ = dyn.simulate(disc, state, -0.01, 15)
    assert back.step == 0
    for f in ("A", "E", "Dhat"):
        assert np.abs(getattr(back, f).coeffs - getattr(start, f).coeffs).max() <= 1e-10


def test_initial_data_is_seeded(torus4_su2):
    a = dyn.make_initial(torus4_su2, "random", 1.0, seed=5)
    b = dyn.make_initial(torus4_su2, "random", 1.0, seed=5)
    c = dyn.make_initial(torus4_su2, "random", 1.0, seed=6)
    assert np.array_equal(a.A.coeffs, b.A.coeffs) and np.array_equal(a.E.coeffs, b.E.coeffs)
    assert not np.allclose(a.A.coeffs, c.A.coeffs)


def test_random_scenario_carries_charge(square3_su2):
    state = dyn.make_initial(square3_su2, "random", 1.0, seed=2)
    assert np.abs(state.Q0).max() > 1e-3
    assert np.all(state.A.coeffs[square3_su2.V1.boundary_dofs] == 0.0)


def test_zero_steps_returns_initial_state(torus4_su2):
    state = dyn.make_initial(torus4_su2, "su2_bump")
    final, records = dyn.simulate(torus4_su2, state, 0.01, 0)
    assert final is state and len(records) == 1 and records[0].step == 0


def test_output_every_thins_records(torus4_su2):
    state = dyn.make_initial(torus4_su2, "su2_bump")
    _, records = dyn.simulate(torus4_su2, state, 0.01, 5, output_every=2)
    assert [r.step for r in records] == [0, 2, 4, 5]
    assert records[-1].time == pytest.approx(0.05)


def test_large_step_warns(torus4_su2):
    state = dyn.make_initial(torus4_su2, "zero")
    with pytest.warns(RuntimeWarning, match="stability"):
        dyn.simulate(torus4_su2, state, 1.0, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dyn.simulate(torus4_su2, state, 0.01, 0)


def test_non_finite_values_abort(torus4_su2, monkeypatch):
    state = dyn.make_initial(torus4_su2, "su2_bump")

    def poisoned(disc, Dhat, *args):
        return Field(Dhat.space, Dhat.algebra, np.full_like(Dhat.coeffs, np.nan))

    monkeypatch.setattr(dyn, "dhat_step", poisoned)
    with pytest.raises(dyn.InstabilityError, match="step 1"):
        dyn.simulate(torus4_su2, state, 0.01, 3)


def test_abelian_wave_conserves_hybrid_charge(torus4_u1):
    state = dyn.make_initial(torus4_u1, "u1_wave")
    for _ in range(10):
        state = dyn.leapfrog_step(torus4_u1, state, 0.01)
        assert np.abs(element_charges_hat(torus4_u1, state.A, state.E, state.Dhat) - state.Q0).max() <= 1e-10
    assert np.abs(state.E.coeffs).max() > 1e-3


def test_rotated_state(torus4_su2, rng):
    state = dyn.make_initial(torus4_su2, "random", seed=1)
    R = lie.random_rotation(torus4_su2.alg, rng)
    rot = state.rotated(R)
    assert np.allclose(rot.A.coeffs, state.A.coeffs @ R.T)
    assert np.allclose(rot.Q0, state.Q0 @ R.T)


def test_bad_names_are_rejected(torus4_su2):
    with pytest.raises(ValueError):
        dyn.make_mesh("disk", 4, 4)
    with pytest.raises(ValueError):
        dyn.make_initial(torus4_su2, "vortex")


def test_run_from_config(tmp_path):
    cfg = RunConfig(nx=4, ny=4, steps=3, scenario="random", output_dir=str(tmp_path)).validate()
    disc, final, records = dyn.run(cfg)
    assert final.step == 3 and len(records) == 4
    assert max(r.max_abs_Q_drift for r in records) <= 1e-10


def test_sign_fault_flips_one_sign(torus4_su2):
    bad = dyn.with_sign_fault(torus4_su2.mesh, 2, 1)
    diff = bad.tri_edge_signs != torus4_su2.mesh.tri_edge_signs
    assert diff.sum() == 1 and diff[2, 1]
