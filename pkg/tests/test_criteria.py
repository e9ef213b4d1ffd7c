import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shockaudit.criteria import (
    DegenerateShock,
    TolerancePolicy,
    beta_from_resolvent,
    cumulative_flags,
    entropy_dissipation,
    evaluate_point,
    flags_for,
    lax_check,
    lopatinski,
    lv_conditions,
    proof_diagnostics,
    reflag,
    relative_entropy,
    relative_entropy_derivative,
)
from shockaudit.hugoniot import ContinuationConfig, advance, locate_parameter, trace_hugoniot
from shockaudit.model import EvaluationError
from shockaudit.spectral import eigen_decompose, normalized_determinant
from shockaudit.systems import p_system


@pytest.fixture(scope="module")
def burgers_shock(burgers, burgers_curve):
    return locate_parameter(burgers, burgers_curve, lambda p: p.state[0])


@pytest.fixture(scope="module")
def psys_shock(psys2, psys2_curve):
    return locate_parameter(psys2, psys2_curve, lambda p: p.state[0] - 0.5)


def test_relative_entropy_quadratic(burgers):
    assert relative_entropy(burgers, [3.0], [1.0]) == pytest.approx(2.0)
    assert relative_entropy(burgers, [0.4], [0.4]) == 0.0


def test_relative_entropy_p_system_shock(psys2, psys_shock):
    # eta = u^2/2 + 1/v; eta(u|S) at u=(1,0), S=(0.5,-sqrt6/2)
    assert relative_entropy(psys2, [1.0, 0.0], psys_shock.state) == pytest.approx(1.75, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-2, 2), st.floats(0.2, 3.0), st.floats(-2, 2))
def test_relative_entropy_nonnegative(v1, u1, v2, u2):
    assert relative_entropy(p_system(1.0, 1.4), [v1, u1], [v2, u2]) >= -1e-12


def test_relative_entropy_derivative_burgers(burgers, burgers_curve):
    for p in burgers_curve.points[1:20]:
        # S = 1 - a, S' = -|S'|; <S', S - u> = a |S'| >= 0
        a = 1 - p.state[0]
        assert relative_entropy_derivative(burgers, [1.0], p) == pytest.approx(-p.state_tangent[0] * a)
        assert relative_entropy_derivative(burgers, [1.0], p) > 0
    assert relative_entropy_derivative(burgers, [1.0], burgers_curve.points[0]) == 0.0


def test_relative_entropy_derivative_by_differences(psys2, psys2_curve):
    u = np.array([1.0, 0.0])
    for p in psys2_curve.points[5:40:5]:
        h = 1e-5
        fd = (relative_entropy(psys2, u, advance(psys2, u, p, h).state)
              - relative_entropy(psys2, u, advance(psys2, u, p, -h).state)) / (2 * h)
        assert fd == pytest.approx(relative_entropy_derivative(psys2, u, p), rel=1e-6, abs=1e-10)


def test_lax_burgers_margins(burgers, burgers_curve):
    p = locate_parameter(burgers, burgers_curve, lambda q: q.state[0] - 0.5)
    np.testing.assert_allclose(lax_check(burgers, [1.0], p), [0.25, 0.25], atol=1e-12)
    np.testing.assert_allclose(lax_check(burgers, [1.0], burgers_curve.points[0]), [0.0, 0.0], atol=1e-15)


def test_lax_p_system_running_example(psys2, psys_shock):
    m = lax_check(psys2, [1.0, 0.0], psys_shock)
    assert np.all(m > 0)
    np.testing.assert_allclose(m[:3], [math.sqrt(6) - math.sqrt(2), 4 - math.sqrt(6), 4 + math.sqrt(6)],
                               atol=1e-9)


def test_lopatinski_scalar_unit(burgers, burgers_curve):
    for p in burgers_curve.points[1::10]:
        assert abs(lopatinski(burgers, [1.0], p)) == pytest.approx(1.0)


def test_lopatinski_p_system_hand_value(psys2, psys_shock):
    # columns (-0.5, -sqrt6/2) and r_2 ~ (1, -4); P(S) = diag(16, 1)
    raw = 2 + math.sqrt(6) / 2
    expected = raw / math.sqrt(5.5) / math.sqrt(32)
    assert abs(lopatinski(psys2, [1.0, 0.0], psys_shock)) == pytest.approx(expected, rel=1e-9)


def test_lopatinski_degenerate(burgers, burgers_curve):
    with pytest.raises(DegenerateShock, match="degenerate: zero-amplitude shock"):
        lopatinski(burgers, [1.0], burgers_curve.points[0])


def test_lopatinski_small_amplitude_limit(psys2):
    u = np.array([1.0, 0.0])
    c = trace_hugoniot(psys2, u, ContinuationConfig(h0=1e-6, max_arclength=1e-3))
    sp = eigen_decompose(psys2, u)
    limit = normalized_determinant([c.orientation * sp.r(1), sp.r(2)], psys2.P(u))
    for p in c.points[1:4]:
        assert lopatinski(psys2, u, p) == pytest.approx(limit, abs=1e-3)


def test_dissipation_burgers(burgers, burgers_shock, burgers_curve):
    assert entropy_dissipation(burgers, [1.0], burgers_shock) == pytest.approx(-1 / 12, abs=1e-12)
    assert entropy_dissipation(burgers, [1.0], burgers_curve.points[0]) == 0.0


def test_dissipation_expansion_branch(burgers):
    cfg = ContinuationConfig(require_lax=False)
    c = trace_hugoniot(burgers, [1.0], cfg, orientation=1)
    p = locate_parameter(burgers, c, lambda q: q.state[0] - 2.0, cfg)
    assert entropy_dissipation(burgers, [1.0], p) == pytest.approx(1 / 12, abs=1e-12)
    rep = evaluate_point(burgers, [1.0], p)
    assert rep.flags["dissipative"] is False
    assert rep.flags["lax"] is False


def test_dissipation_needs_entropy_flux(psys2, psys_shock):
    with pytest.raises(EvaluationError, match="entropy flux unavailable"):
        entropy_dissipation(replace(psys2, entropy_flux=None), [1.0, 0.0], psys_shock)


def test_dissipation_derivative_identity(psys2, psys2_curve):
    # D' = sigma' eta(u|S) along the curve
    u = np.array([1.0, 0.0])
    for p in psys2_curve.points[5:40:7]:
        h = 1e-5
        dD = (entropy_dissipation(psys2, u, advance(psys2, u, p, h))
              - entropy_dissipation(psys2, u, advance(psys2, u, p, -h))) / (2 * h)
        assert dD == pytest.approx(p.speed_tangent * relative_entropy(psys2, u, p.state), rel=1e-6)


def test_proof_diagnostics_running_example(psys2, psys_shock):
    u = [1.0, 0.0]
    right = eigen_decompose(psys2, psys_shock.state)
    diag = proof_diagnostics(psys2, u, psys_shock, right)
    R = right.eigenvectors
    np.testing.assert_allclose(R @ diag.alpha, psys_shock.state - np.array(u), atol=1e-12)
    assert diag.beta[1] * diag.alpha[1] >= 0
    assert diag.identity_gap <= 10 * diag.identity_scale
    np.testing.assert_allclose(beta_from_resolvent(psys2, u, psys_shock, right)[1:], diag.beta[1:], rtol=1e-10)


def test_evaluate_point_running_example(psys2, psys_shock):
    rep = evaluate_point(psys2, [1.0, 0.0], psys_shock)
    for key in ("lax", "lopatinski", "i_prime", "ii_prime", "dissipative", "hypotheses"):
        assert rep.flags[key] is True, key
    assert rep.flags["counterexample"] is False
    assert rep.dissipation < 0


def test_evaluate_point_at_seed(burgers, burgers_curve):
    rep = evaluate_point(burgers, [1.0], burgers_curve.points[0])
    assert rep.lopatinski_det is None and rep.flags["lopatinski"] is None
    assert rep.flags["i_prime"] and rep.flags["ii_prime"]
    assert rep.rel_entropy_deriv == 0.0


def test_flags_are_idempotent(psys2, psys_shock):
    rep = evaluate_point(psys2, [1.0, 0.0], psys_shock)
    pol = TolerancePolicy()
    assert reflag(reflag(rep, pol), pol).flags == rep.flags
    assert flags_for(rep, pol) == rep.flags


def test_tolerance_band_changes_flags(burgers, burgers_curve):
    rep = evaluate_point(burgers, [1.0], burgers_curve.points[1])
    tight = reflag(rep, TolerancePolicy(delta_lop=2.0))
    assert tight.flags["lopatinski"] is False and tight.flags["counterexample"] is True


def test_lv_conditions_burgers(burgers, burgers_curve):
    for s_plus in (0.3, 1.0, burgers_curve.arclength):
        lv = lv_conditions(burgers, [1.0], burgers_curve, s_plus)
        assert all(lv.as_flags().values())


def test_lv_conditions_at_zero(burgers, burgers_curve):
    lv = lv_conditions(burgers, [1.0], burgers_curve, 0.0)
    assert lv.i_prime.passed and lv.ii_prime.passed
    assert lv.ii_prime.worst_margin == 0.0


def test_lv_conditions_p_system(psys2, psys2_curve, psys_shock):
    lv = lv_conditions(psys2, [1.0, 0.0], psys2_curve, psys_shock.s)
    assert all(lv.as_flags().values())
    assert lv.i.worst_margin > 0


def test_cumulative_flags(burgers, burgers_curve):
    reports = [evaluate_point(burgers, [1.0], p) for p in burgers_curve.points[:10]]
    out = cumulative_flags(reports, TolerancePolicy())
    assert len(out) == 10 and all(all(c.as_flags().values()) for c in out)
    assert cumulative_flags([], TolerancePolicy()) == []


def test_policy_rejects_nonpositive():
    with pytest.raises(ValueError):
        TolerancePolicy(eps_eq=0.0)
