"""Second-order forward-mode differentiation of expression trees.

A jet carries value, gradient and Hessian with respect to the state.  Every
rule builds the Hessian from symmetric pieces (``H``, ``g g^T``,
``g h^T + h g^T``), so it is exactly symmetric in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from ..model import ShockAuditError
from .ast import Binary, Const, Expr, Param, Pow, Unary, Var, to_source


class ExprDomainError(ShockAuditError):
    pass


class UnboundParameter(ShockAuditError):
    pass


@dataclass(frozen=True)
class Jet:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    @classmethod
    def constant(cls, value: float, n: int) -> "Jet":
        return cls(float(value), np.zeros(n), np.zeros((n, n)))

    @classmethod
    def variable(cls, value: float, index: int, n: int) -> "Jet":
        g = np.zeros(n)
        g[index] = 1.0
        return cls(float(value), g, np.zeros((n, n)))

    def __add__(self, other: "Jet") -> "Jet":
        return Jet(self.value + other.value, self.gradient + other.gradient, self.hessian + other.hessian)

    def __sub__(self, other: "Jet") -> "Jet":
        return Jet(self.value - other.value, self.gradient - other.gradient, self.hessian - other.hessian)

    def __neg__(self) -> "Jet":
        return Jet(-self.value, -self.gradient, -self.hessian)

    def __mul__(self, other: "Jet") -> "Jet":
        a, b = self.value, other.value
        cross = np.outer(self.gradient, other.gradient)
        return Jet(
            a * b,
            a * other.gradient + b * self.gradient,
            a * other.hessian + b * self.hessian + (cross + cross.T),
        )

    def chain(self, f0: float, f1: float, f2: float) -> "Jet":
        """Compose a scalar function with value/derivatives ``f0, f1, f2`` at ``self.value``."""
        g = self.gradient
        return Jet(f0, f1 * g, f1 * self.hessian + f2 * np.outer(g, g))


def _pow_derivs(x: float, c: float, where: str) -> tuple:
    integral = float(c).is_integer()
    if x < 0 and not integral:
        raise ExprDomainError(f"non-integer power of negative value in {where}")
    if x == 0 and c < 0:
        raise ExprDomainError(f"negative power of zero in {where}")

    def p(k):
        return 0.0 if (x == 0 and k < 0) else x**k

    f0 = x**c
    f1 = 0.0 if c == 0 else c * p(c - 1)
    f2 = 0.0 if c in (0, 1) else c * (c - 1) * p(c - 2)
    return f0, f1, f2


def _unary(op: str, j: Jet, where: str) -> Jet:
    x = j.value
    if op == "neg":
        return -j
    if op == "exp":
        e = math.exp(x)
        return j.chain(e, e, e)
    if op == "log":
        if x <= 0:
            raise ExprDomainError(f"log of nonpositive value {x!r} in {where}")
        return j.chain(math.log(x), 1 / x, -1 / (x * x))
    if op == "sqrt":
        if x <= 0:
            raise ExprDomainError(f"sqrt of nonpositive value {x!r} in {where}")
        r = math.sqrt(x)
        return j.chain(r, 0.5 / r, -0.25 / (r * x))
    raise ValueError(f"unknown unary operator {op!r}")


def eval_value(node: Expr, state, params: Optional[Mapping[str, float]] = None) -> float:
    """Plain value without derivatives."""
    params = params or {}
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return float(state[node.index - 1])
    if isinstance(node, Param):
        if node.name not in params:
            raise UnboundParameter(f"parameter {node.name!r} is not bound")
        return float(params[node.name])
    return eval_jet(node, state, params).value


def eval_jet(node: Expr, state, params: Optional[Mapping[str, float]] = None) -> Jet:
    """Value, exact gradient and exact Hessian of ``node`` at ``state``."""
    state = np.asarray(state, dtype=float).reshape(-1)
    n = state.size
    params = params or {}

    def ev(e: Expr) -> Jet:
        if isinstance(e, Const):
            return Jet.constant(e.value, n)
        if isinstance(e, Var):
            if not 1 <= e.index <= n:
                raise UnboundParameter(f"variable u{e.index} out of range for a state of dimension {n}")
            return Jet.variable(state[e.index - 1], e.index - 1, n)
        if isinstance(e, Param):
            if e.name not in params:
                raise UnboundParameter(f"parameter {e.name!r} is not bound")
            return Jet.constant(params[e.name], n)
        if isinstance(e, Unary):
            return _unary(e.op, ev(e.operand), to_source(e))
        if isinstance(e, Pow):
            base = ev(e.base)
            c = ev(e.exponent).value
            return base.chain(*_pow_derivs(base.value, c, to_source(e)))
        if isinstance(e, Binary):
            a, b = ev(e.left), ev(e.right)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if e.op == "/":
                if b.value == 0:
                    raise ExprDomainError(f"division by zero in {to_source(e)}")
                x = b.value
                return a * b.chain(1 / x, -1 / (x * x), 2 / (x * x * x))
            raise ValueError(f"unknown binary operator {e.op!r}")
        raise TypeError(f"not an expression node: {e!r}")

    return ev(node)
