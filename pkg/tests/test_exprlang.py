import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shockaudit.exprlang import (
    Binary,
    Const,
    ExprDomainError,
    ParseError,
    Pow,
    SystemConfigError,
    SystemValidationError,
    UnboundParameter,
    Unary,
    Var,
    build_system,
    eval_jet,
    eval_value,
    parse,
    to_source,
)
from shockaudit.model import central_difference

BURGERS_DOC = {
    "n": 1,
    "flux": ["u1*u1/2"],
    "entropy": "u1^2/2",
    "entropy_flux": "u1^3/3",
    "samples": [[1.0], [-0.5]],
}

P_SYSTEM_DOC = {
    "n": 2,
    "variables": ["v", "w"],
    "parameters": {"k": 1.0, "gamma": 2.0},
    "flux": ["-w", "k*v^(-gamma)"],
    "entropy": "w^2/2 + k*v^(1-gamma)/(gamma-1)",
    "entropy_flux": "k*w*v^(-gamma)",
    "domain": ["v"],
    "samples": [[1.0, 0.0], [0.5, 1.0]],
}

CORPUS = [
    "u1", "2", "3.5e-2", "u1 + u2", "u1 - u2 - u3", "u1 * u2 / u3", "u1 / u2 * u3",
    "-u1", "-u1^2", "u1^-2", "2^3^2", "(u1 + 1)^2", "-(u1 + u2)", "+u1", "exp(u1)",
    "log(u1 + 2)", "sqrt(u1*u1 + 1)", "exp(-u1^2/2)", "u1*u2 + u2*u3 - u1", "k*v^(-gamma)",
    "u1^(1/3)", "(u1 - u2)/(u1 + u2)", "u2*u2/u1 + p", "log(exp(u1))", "--u1",
    "1 - -u1", "u1^2^0.5", "(u1)", "((u1))", "u1*(u2 - (u3 + 1))",
    "sqrt(u1)^3", "exp(u1)*log(u2)", "u1/u2/u3", "u1 - (u2 - u3)", "2*u1 - 3*u2 + 4",
    "-u1*-u2", "u1^k", "u1^(k+1)/(k+1)", "gamma*p/rho", "0.5*rho*w^2",
    "u1*exp(-u2)", "sqrt(sqrt(u1))", "(u1^2 + u2^2)^0.5", "1/(1 + u1^2)", "log(u1)*u1",
    "u1 + u2 * u3 ^ 2", "-(-(-u1))", "exp(log(u1) * 2)", "u3/u1 - u2^2/(2*u1^2)", "1e3*u1",
]


def test_simple_tree():
    assert parse("u1*u1/2") == Binary("/", Binary("*", Var(1), Var(1)), Const(2.0))


def test_alias_power_node():
    node = parse("k*v^(-gamma)", n=1, aliases={"v": 1}, parameters={"k", "gamma"})
    assert isinstance(node, Binary) and isinstance(node.right, Pow)
    assert node.right.base == Var(1)


def test_precedence_rules():
    assert parse("-u1^2") == Pow(Unary("neg", Var(1)), Const(2.0))
    assert parse("2^3^2") == Pow(Const(2.0), Pow(Const(3.0), Const(2.0)))
    assert eval_value(parse("2^3^2"), [0.0]) == 512.0


def test_syntax_error_column():
    with pytest.raises(ParseError, match="column 6") as info:
        parse("u1 + * 2")
    assert info.value.line == 1 and info.value.column == 6


def test_error_line_numbers():
    with pytest.raises(ParseError) as info:
        parse("u1 +\n  u2 )")
    assert (info.value.line, info.value.column) == (2, 6)


@pytest.mark.parametrize("src", ["u1 $ 2", "(u1", "u1 u2", "exp u1", "", "u1^u2"])
def test_malformed_inputs(src):
    with pytest.raises(ParseError):
        parse(src)


def test_unknown_identifier_when_parameters_declared():
    with pytest.raises(ParseError, match="unknown identifier 'z'"):
        parse("u1 + z", parameters={"k"})
    with pytest.raises(ParseError, match="unknown identifier 'u3'"):
        parse("u3", n=2)


def test_corpus_size():
    assert len(CORPUS) == 50 and len(set(CORPUS)) == 50


@pytest.mark.parametrize("src", CORPUS)
def test_round_trip(src):
    tree = parse(src)
    printed = to_source(tree)
    assert parse(printed) == tree
    assert to_source(parse(printed)) == printed


def test_jet_quadratic():
    j = eval_jet(parse("u1*u1/2"), [3.0])
    assert j.value == 4.5
    np.testing.assert_array_equal(j.gradient, [3.0])
    np.testing.assert_array_equal(j.hessian, [[1.0]])


def test_jet_p_system_entropy():
    w = -math.sqrt(6) / 2
    j = eval_jet(parse("u2*u2/2 + u1^(-1)"), [0.5, w])
    assert j.value == pytest.approx(0.75 + 2.0)
    np.testing.assert_allclose(j.gradient, [-4.0, w])
    np.testing.assert_allclose(j.hessian, np.diag([16.0, 1.0]))


def test_jet_hessian_symmetric_mixed_terms():
    j = eval_jet(parse("exp(u1*u2) + sqrt(u1)*u3^2"), [0.7, -0.3, 1.1])
    np.testing.assert_array_equal(j.hessian, j.hessian.T)


def test_domain_errors_name_subexpression():
    with pytest.raises(ExprDomainError, match=r"log"):
        eval_value(parse("log(u1 - 2)"), [1.0])
    with pytest.raises(ExprDomainError, match=r"sqrt"):
        eval_jet(parse("sqrt(-u1)"), [1.0])


def test_unbound_parameter():
    with pytest.raises(UnboundParameter):
        eval_value(parse("k*u1"), [1.0])


def _fd_gradient(node, u):
    return central_difference(lambda x: np.atleast_1d(eval_value(node, x)), u)[0]


def _fd_hessian(node, u):
    return central_difference(lambda x: eval_jet(node, x).gradient, u)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-2.0, 2.0), st.floats(0.3, 3.0))
def test_jet_against_differences(a, b, c):
    node = parse("exp(-u2^2/2)*log(u1 + u3) + u1^1.5*u3 - u2/u1")
    u = np.array([a, b, c])
    j = eval_jet(node, u)
    np.testing.assert_allclose(j.gradient, _fd_gradient(node, u), rtol=1e-6, atol=1e-7)
    np.testing.assert_allclose(j.hessian, _fd_hessian(node, u), rtol=1e-6, atol=1e-6)


def test_build_burgers_matches_catalog(burgers, rng):
    model = build_system(BURGERS_DOC)
    for u in rng.uniform(-3, 3, size=(100, 1)):
        np.testing.assert_allclose(model.f(u), burgers.f(u), rtol=1e-14, atol=1e-14)
        np.testing.assert_allclose(model.A(u), burgers.A(u), rtol=1e-14, atol=1e-14)
        assert model.eta(u) == pytest.approx(burgers.eta(u), rel=1e-14, abs=1e-14)
        np.testing.assert_allclose(model.P(u), burgers.P(u), rtol=1e-14)
        assert model.q(u) == pytest.approx(burgers.q(u), rel=1e-14, abs=1e-14)


def test_build_p_system_matches_catalog(psys2, rng):
    model = build_system(P_SYSTEM_DOC)
    for u in np.column_stack([rng.uniform(0.2, 3, 50), rng.uniform(-2, 2, 50)]):
        np.testing.assert_allclose(model.f(u), psys2.f(u), rtol=1e-13)
        np.testing.assert_allclose(model.P(u), psys2.P(u), rtol=1e-13)
        assert model.q(u) == pytest.approx(psys2.q(u), rel=1e-13, abs=1e-13)
    assert not model.admissible(np.array([-1.0, 0.0]))


def test_indefinite_entropy_rejected():
    doc = dict(BURGERS_DOC, n=2, flux=["u1", "u2"], entropy="u1*u2", entropy_flux=None,
               samples=[[1.0, 1.0]])
    with pytest.raises(SystemValidationError, match="entropy Hessian not positive definite"):
        build_system(doc)


def test_config_errors():
    with pytest.raises(SystemConfigError, match="missing key 'entropy'"):
        build_system({"n": 1, "flux": ["u1"]})
    with pytest.raises(SystemConfigError, match="exactly 2"):
        build_system(dict(P_SYSTEM_DOC, flux=["-w"]))
    with pytest.raises(SystemConfigError, match="samples"):
        build_system(dict(BURGERS_DOC, samples=[]))
