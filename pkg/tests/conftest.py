import numpy as np
import pytest

from shockaudit.audit import AuditResult, StateAudit, SweepResult
from shockaudit.hugoniot import trace_hugoniot
from shockaudit.model import ConditionReport, HugoniotPoint
from shockaudit.systems import catalog_lookup


@pytest.fixture(scope="session")
def burgers():
    return catalog_lookup("burgers")


@pytest.fixture(scope="session")
def psys2():
    return catalog_lookup("p_system", {"k": 1.0, "gamma": 2.0})


@pytest.fixture(scope="session")
def euler():
    return catalog_lookup("euler_ideal", {"gamma": 1.4})


@pytest.fixture(scope="session")
def burgers_curve(burgers):
    return trace_hugoniot(burgers, [1.0])


@pytest.fixture(scope="session")
def psys2_curve(psys2):
    return trace_hugoniot(psys2, [1.0, 0.0])


@pytest.fixture(scope="session")
def euler_left():
    rho, vel, p = 1.0, 0.0, 1.0
    return np.array([rho, rho * vel, p / 0.4 + 0.5 * rho * vel * vel])


@pytest.fixture(scope="session")
def euler_curve(euler, euler_left):
    return trace_hugoniot(euler, euler_left)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _fake_result(det=0.0):
    point = HugoniotPoint(0.3, np.array([0.7, 0.2]), -2.0, np.array([-0.6, 0.8]), -0.5)
    rep = ConditionReport(
        left_state=np.array([1.0, 0.0]), point=point, lax_margins=np.array([0.5, 0.5, 1.0]),
        lopatinski_det=det, rel_entropy=0.1, rel_entropy_deriv=0.2, speed_deriv=-0.5, dissipation=-0.01,
        alpha=None, beta=None,
    )
    st = StateAudit(0, 0, np.array([1.0, 0.0]), "traced", reports=[rep], range_flags=[{"i": True}])
    return AuditResult(sweeps=[SweepResult("fake", {"name": "fake"}, [st])])


@pytest.fixture
def fake_result():
    """Hand-built audit result whose single report satisfies every hypothesis."""
    return _fake_result


_ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    """Store one verdict line per acceptance criterion for the terminal summary."""

    def rec(number: int, title: str, passed: bool, detail: str):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed

    return rec


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
