from dataclasses import replace

import numpy as np
import pytest

from shockaudit.model import (
    DomainError,
    EvaluationError,
    HugoniotCurve,
    HugoniotPoint,
    SystemModel,
    central_difference,
    validate_system,
)
from shockaudit.systems import catalog_lookup


def _indefinite_model():
    # eta = u1^2 + u1 u2 has Hessian [[2, 1], [1, 0]] (det -1)
    return SystemModel(
        n=2,
        flux=lambda u: u.copy(),
        jacobian=lambda u: np.eye(2),
        entropy=lambda u: u[0] ** 2 + u[0] * u[1],
        entropy_gradient=lambda u: np.array([2 * u[0] + u[1], u[0]]),
        entropy_hessian=lambda u: np.array([[2.0, 1.0], [1.0, 0.0]]),
    )


def test_burgers_validates_to_machine_precision(burgers):
    rep = validate_system(burgers, [[1.0]])
    assert rep.passed
    res = rep.samples[0].residuals
    assert res["hessian_asymmetry"] == 0.0
    assert res["pa_asymmetry"] == 0.0


def test_p_system_hand_values(psys2):
    u = np.array([1.0, 0.0])
    # p'(v) = -2 v^-3 = -2 at v = 1; eta_vv = 2 v^-3
    np.testing.assert_allclose(psys2.P(u), np.diag([2.0, 1.0]))
    np.testing.assert_allclose(psys2.A(u), [[0.0, -1.0], [-2.0, 0.0]])
    np.testing.assert_allclose(psys2.P(u) @ psys2.A(u), [[0.0, -2.0], [-2.0, 0.0]])
    assert validate_system(psys2, [u]).passed


def test_indefinite_entropy_rejected():
    rep = validate_system(_indefinite_model(), [[1.0, 1.0]])
    assert not rep.passed
    assert any("entropy Hessian not positive definite" in msg for _, msg in rep.failures)


def test_sample_outside_domain_is_named(psys2):
    with pytest.raises(DomainError, match=r"-1\.0"):
        validate_system(psys2, [[-1.0, 0.0]])


def test_non_finite_evaluation_raises():
    model = SystemModel(
        n=1,
        flux=lambda u: np.array([np.nan]),
        jacobian=lambda u: np.array([[1.0]]),
        entropy=lambda u: 0.5 * u[0] ** 2,
        entropy_gradient=lambda u: u.copy(),
        entropy_hessian=lambda u: np.eye(1),
    )
    with pytest.raises(EvaluationError):
        validate_system(model, [[0.3]])


def test_incompatible_entropy_flux_detected(burgers):
    bad = replace(burgers, entropy_flux=lambda u: u[0] ** 3)
    rep = validate_system(bad, [[1.5]])
    assert any("entropy flux incompatible" in msg for _, msg in rep.failures)


@pytest.mark.parametrize("name,params,state", [
    ("p_system", {"gamma": 1.4}, [0.8, 0.3]),
    ("euler_ideal", {}, [1.2, 0.3, 2.7]),
    ("shallow_water", {}, [1.3, -0.4]),
])
def test_flux_jacobian_richardson(name, params, state):
    model = catalog_lookup(name, params)
    u = np.array(state)
    exact = model.A(u)
    errors = [np.linalg.norm(central_difference(model.f, u, h) - exact) for h in (1e-2, 5e-3)]
    assert errors[0] / errors[1] >= 3.5


def test_curve_with_points_keeps_metadata():
    pt = HugoniotPoint(0.0, np.array([1.0]), 1.0, np.array([-1.0]), -0.5)
    c = HugoniotCurve(left_state=np.array([1.0]), orientation=-1, stop_reason="x")
    c2 = c.with_points([pt])
    assert c2.orientation == -1 and c2.stop_reason == "x" and len(c2) == 1


def test_model_dimension_must_be_positive():
    with pytest.raises(ValueError):
        SystemModel(n=0, flux=None, jacobian=None, entropy=None, entropy_gradient=None, entropy_hessian=None)
