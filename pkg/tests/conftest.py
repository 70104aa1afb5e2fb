import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ymhybrid import lie
from ymhybrid.assembly import Discretization
from ymhybrid.mesh import structured_square

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def su2():
    return lie.su2()


@pytest.fixture(scope="session")
def u1():
    return lie.u1()


@pytest.fixture(scope="session")
def torus4_su2():
    return Discretization(structured_square(4, 4, periodic=True), lie.su2())


@pytest.fixture(scope="session")
def square3_su2():
    return Discretization(structured_square(3, 3, periodic=False), lie.su2())


@pytest.fixture(scope="session")
def torus4_u1():
    return Discretization(structured_square(4, 4, periodic=True), lie.u1())


# acceptance criteria report: criterion -> list of (passed, detail)
ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE.setdefault(number, []).append((bool(passed), detail))
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(f"{'ok' if ok else 'FAILED'}: {d}" for ok, d in parts)
        terminalreporter.write_line(f"criterion {number}: {verdict} | {details}")
