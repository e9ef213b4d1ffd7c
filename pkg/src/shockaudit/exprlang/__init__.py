"""Expression language for user-defined systems, with forward-mode jets."""

from .ast import Binary, Const, Expr, Param, Pow, Unary, Var, to_source
from .jet import ExprDomainError, Jet, UnboundParameter, eval_jet, eval_value
from .parser import ParseError, parse
from .system import SystemConfigError, SystemValidationError, build_system

__all__ = [
    "Binary", "Const", "Expr", "Param", "Pow", "Unary", "Var", "to_source",
    "ExprDomainError", "Jet", "UnboundParameter", "eval_jet", "eval_value",
    "ParseError", "parse",
    "SystemConfigError", "SystemValidationError", "build_system",
]
