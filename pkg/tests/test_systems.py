import math

import numpy as np
import pytest

from shockaudit.hugoniot import trace_hugoniot
from shockaudit.model import validate_system
from shockaudit.systems import (
    CatalogError,
    NotOnShockBranch,
    analytic_hugoniot,
    catalog_lookup,
    catalog_names,
    sample_states,
    shared_coordinate,
)


def test_catalog_names():
    assert catalog_names() == ["burgers", "euler_ideal", "p_system", "shallow_water"]


def test_burgers_lookup(burgers):
    assert burgers.n == 1


def test_p_system_lookup_validates():
    model = catalog_lookup("p_system", {"k": 1, "γ": 1.4})
    assert validate_system(model, [[1.0, 0.0], [0.5, 1.0]]).passed


@pytest.mark.parametrize("params", [{"γ": 0.5}, {"k": -1}, {"bogus": 1}, {"gamma": "x"}])
def test_bad_parameters(params):
    with pytest.raises(CatalogError):
        catalog_lookup("p_system", params)


def test_unknown_system():
    with pytest.raises(CatalogError, match="unknown system"):
        catalog_lookup("mhd")


@pytest.mark.parametrize("name,params", [
    ("burgers", {}), ("p_system", {"gamma": 1.4}), ("p_system", {"gamma": 2.0}),
    ("euler_ideal", {"gamma": 1.4}), ("shallow_water", {"g": 9.81}),
])
def test_catalog_models_validate_on_samples(name, params, rng):
    model = catalog_lookup(name, params)
    report = validate_system(model, sample_states(name, params, 25, rng))
    assert report.passed, report.failures


def test_analytic_burgers():
    S, sigma = analytic_hugoniot("burgers", {}, [1.0], 0.0)
    assert S[0] == 0.0 and sigma == 0.5
    with pytest.raises(NotOnShockBranch, match="not on the shock branch"):
        analytic_hugoniot("burgers", {}, [1.0], 2.0)


def test_analytic_p_system_running_example():
    S, sigma = analytic_hugoniot("p_system", {"k": 1, "gamma": 2}, [1.0, 0.0], 0.5)
    assert sigma == pytest.approx(-math.sqrt(6))
    np.testing.assert_allclose(S, [0.5, -math.sqrt(6) / 2])
    S0, sigma0 = analytic_hugoniot("p_system", {"k": 1, "gamma": 2}, [1.0, 0.0], 1.0)
    np.testing.assert_array_equal(S0, [1.0, 0.0])
    assert sigma0 == pytest.approx(-math.sqrt(2))


@pytest.mark.parametrize("name,params,u,target", [
    ("p_system", {"gamma": 1.4}, [1.2, 0.3], 0.7),
    ("euler_ideal", {"gamma": 1.4}, [1.0, 0.2, 2.6], 3.0),
    ("shallow_water", {"g": 9.81}, [1.0, 0.5], 1.8),
])
def test_analytic_loci_satisfy_jump_relations(name, params, u, target):
    model = catalog_lookup(name, params)
    u = np.array(u)
    S, sigma = analytic_hugoniot(name, params, u, target)
    np.testing.assert_allclose(sigma * (S - u), model.f(S) - model.f(u), atol=1e-12)
    assert shared_coordinate(name, params, S) == pytest.approx(target)


def test_euler_trace_matches_textbook_shock(euler, euler_left, euler_curve):
    for p in euler_curve.points[1::15]:
        pr = shared_coordinate("euler_ideal", {"gamma": 1.4}, p.state)
        S, sigma = analytic_hugoniot("euler_ideal", {"gamma": 1.4}, euler_left, pr)
        np.testing.assert_allclose(p.state, S, atol=1e-9)
        assert p.speed == pytest.approx(sigma, abs=1e-9)


def test_shallow_water_trace_matches_oracle():
    model = catalog_lookup("shallow_water", {"g": 9.81})
    u = np.array([1.0, 0.3])
    for p in trace_hugoniot(model, u).points[1::20]:
        S, sigma = analytic_hugoniot("shallow_water", {"g": 9.81}, u, p.state[0])
        np.testing.assert_allclose(p.state, S, atol=1e-9)
        assert p.speed == pytest.approx(sigma, abs=1e-9)


def test_no_locus_for_unknown():
    with pytest.raises(CatalogError):
        analytic_hugoniot("mhd", {}, [1.0], 0.0)
