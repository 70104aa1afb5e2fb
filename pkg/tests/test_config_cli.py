import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ymhybrid import cli
from ymhybrid.config import ConfigError, RunConfig, load_config, parse_config

SMALL = "domain = torus\nnx = 4\nny = 4\nsteps = 3\nscenario = random\n"


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


# ------------------------------------------------------------------ config


def test_empty_text_gives_defaults():
    assert parse_config("") == RunConfig()
    assert parse_config("# only a comment\n\n") == RunConfig()


def test_partial_config_keeps_other_defaults():
    cfg = parse_config("domain = torus\nnx = 4\nny = 4")
    assert (cfg.domain, cfg.nx, cfg.ny) == ("torus", 4, 4)
    assert cfg.dt == 0.01 and cfg.steps == 200 and cfg.weights == (1.0, 1.0)


def test_comments_and_spacing():
    cfg = parse_config("  dt=0.005   # half step\nper_element_csv = no\n")
    assert cfg.dt == 0.005 and cfg.per_element_csv is False


@pytest.mark.parametrize("text, needle", [
    ("dt = -1", "'dt'"),
    ("nx = 2", "'nx'"),
    ("degree_s = 7", "'degree_s'"),
    ("degree_r = 2", "'degree_r'"),
    ("domain = sphere", "'domain'"),
    ("scenario = vortex", "'scenario'"),
    ("weight_h = 0\nweight_d = 0", "'weight_h'"),
])
def test_validation_names_the_key(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(text)


@pytest.mark.parametrize("text, line", [
    ("nx = 4\ncolour = red", 2),
    ("nx = 4\n\nnx = 5", 3),
    ("steps = many", 1),
    ("dt 0.1", 1),
    ("seed =", 1),
])
def test_parse_errors_report_line(text, line):
    with pytest.raises(ConfigError, match=f"line {line}"):
        parse_config(text)


@given(st.integers(3, 64), st.integers(3, 64), st.floats(1e-4, 0.1), st.integers(0, 10_000),
       st.sampled_from(["square", "torus"]), st.sampled_from(["su2", "u1"]))
def test_dump_parse_roundtrip(nx, ny, dt, steps, domain, algebra):
    cfg = RunConfig(domain=domain, nx=nx, ny=ny, dt=dt, steps=steps, algebra=algebra).validate()
    assert parse_config(cfg.dumps()) == cfg


def test_hidden_fault_key_is_not_dumped():
    assert "inject_sign_fault" not in RunConfig().dumps()


def test_load_config(tmp_path):
    assert load_config(write_config(tmp_path, "nx = 5")).nx == 5


# --------------------------------------------------------------------- cli


def run_cli(tmp_path, text, out="out", extra=()):
    path = write_config(tmp_path, text)
    code = cli.main(["run", "--config", str(path), "--output-dir", str(tmp_path / out), *extra])
    return code, tmp_path / out


def test_run_writes_all_outputs(tmp_path, capsys):
    code, out = run_cli(tmp_path, SMALL)
    assert code == cli.EXIT_OK
    lines = (out / "charge_timeseries.csv").read_text().splitlines()
    assert lines[0] == ("step,time,l2_rho_avg,l2_rhohat_avg,max_abs_Q_drift,"
                        "global_charge_norm,energy,constraint_residual")
    assert len(lines) == 1 + 4
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert list(rows[:, 0]) == [0, 1, 2, 3]
    assert rows[:, 4].max() <= 1e-10
    per = (out / "per_element_charge.csv").read_text().splitlines()
    assert per[0] == "step,element,layer,Q"
    assert len(per) == 1 + 4 * 32 * 3
    assert "plot" in (out / "plot.gp").read_text()
    assert (out / "mesh.txt").read_text().startswith("16 32 1")
    assert "wrote 4 records" in capsys.readouterr().out


def test_floats_round_trip_exactly(tmp_path):
    _, out = run_cli(tmp_path, SMALL)
    for ln in (out / "charge_timeseries.csv").read_text().splitlines()[1:]:
        for v in ln.split(",")[1:]:
            assert cli.fmt(float(v)) == v


def test_zero_steps_gives_single_row(tmp_path):
    _, out = run_cli(tmp_path, SMALL.replace("steps = 3", "steps = 0") + "per_element_csv = false\n")
    lines = (out / "charge_timeseries.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("0,0,")
    assert not (out / "per_element_charge.csv").exists()


def test_repeated_runs_are_byte_identical(tmp_path):
    _, a = run_cli(tmp_path, SMALL, "a")
    _, b = run_cli(tmp_path, SMALL, "b")
    for name in ("charge_timeseries.csv", "per_element_charge.csv", "mesh.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_exit_code_for_bad_config(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "dt = -1")
    assert code == cli.EXIT_CONFIG
    assert "dt" in capsys.readouterr().err
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == cli.EXIT_CONFIG


def test_exit_code_for_solver_failure(tmp_path, capsys):
    code, _ = run_cli(tmp_path, SMALL + "degree_s = 1\n")
    assert code == cli.EXIT_RUNTIME
    assert "step 1" in capsys.readouterr().err


def test_print_config(tmp_path, capsys):
    assert cli.main(["print-config", "--config", str(write_config(tmp_path, "nx = 6"))]) == 0
    assert parse_config(capsys.readouterr().out).nx == 6
    assert cli.main(["print-config"]) == 0
    assert parse_config(capsys.readouterr().out) == RunConfig()


def test_selftest_passes_and_detects_fault(capsys):
    assert cli.main(["selftest"]) == cli.EXIT_OK
    table = capsys.readouterr().out
    assert "FAIL" not in table and table.count("PASS") == 6
    assert cli.main(["selftest", "--inject-sign-fault"]) == cli.EXIT_SELFTEST
    table = capsys.readouterr().out
    failed = [ln for ln in table.splitlines() if "FAIL" in ln]
    assert any("conformity" in ln for ln in failed)
    assert any("conservation" in ln for ln in failed)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ymhybrid", "print-config"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "degree_s = 3" in proc.stdout
