"""Expression trees.  Nodes are frozen dataclasses, so ``==`` is structural."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, u1..un


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg", "exp", "log", "sqrt"
    operand: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: "Expr"  # state-independent


@dataclass(frozen=True)
class Binary:
    op: str  # "+", "-", "*", "/"
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Param, Unary, Pow, Binary]

FUNCTIONS = ("exp", "log", "sqrt")


def to_source(node: Expr) -> str:
    """Fully parenthesized source text; ``parse(to_source(t)) == t`` for parsed trees."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"u{node.index}"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{to_source(node.operand)})"
        return f"{node.op}({to_source(node.operand)})"
    if isinstance(node, Pow):
        return f"({to_source(node.base)}^{to_source(node.exponent)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    raise TypeError(f"not an expression node: {node!r}")


def variables(node: Expr) -> set:
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, (Const, Param)):
        return set()
    if isinstance(node, Unary):
        return variables(node.operand)
    if isinstance(node, Pow):
        return variables(node.base) | variables(node.exponent)
    return variables(node.left) | variables(node.right)


def parameters(node: Expr) -> set:
    if isinstance(node, Param):
        return {node.name}
    if isinstance(node, (Const, Var)):
        return set()
    if isinstance(node, Unary):
        return parameters(node.operand)
    if isinstance(node, Pow):
        return parameters(node.base) | parameters(node.exponent)
    return parameters(node.left) | parameters(node.right)
