"""Build a SystemModel from an expression-defined system document.

Document keys::

    n:             number of conserved quantities
    variables:     optional list of n names aliasing u1..un
    parameters:    optional mapping name -> number
    flux:          list of n expressions
    entropy:       expression
    entropy_flux:  optional expression
    domain:        optional list of expressions, each required to be > 0
    samples:       states on which the system is validated before use
    name:          optional label
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..model import ShockAuditError, SystemModel, validate_system
from .ast import Expr
from .jet import ExprDomainError, eval_jet, eval_value
from .parser import parse


class SystemConfigError(ShockAuditError):
    pass


class SystemValidationError(ShockAuditError):
    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


def _parse_all(doc: Mapping, key: str, n: int, aliases: dict, params: dict):
    raw = doc[key]
    if isinstance(raw, str):
        return parse(raw, n, aliases, params)
    return [parse(str(src), n, aliases, params) for src in raw]


def build_system(doc: Mapping, validate: bool = True) -> SystemModel:
    for key in ("n", "flux", "entropy"):
        if key not in doc:
            raise SystemConfigError(f"system document is missing key {key!r}")
    n = int(doc["n"])
    names = list(doc.get("variables") or [])
    if names and len(names) != n:
        raise SystemConfigError(f"'variables' lists {len(names)} names for n={n}")
    aliases = {name: i + 1 for i, name in enumerate(names)}
    params = {str(k): float(v) for k, v in (doc.get("parameters") or {}).items()}

    flux_src = doc["flux"]
    if isinstance(flux_src, str) or len(flux_src) != n:
        raise SystemConfigError(f"'flux' must list exactly {n} expressions")
    flux: list = _parse_all(doc, "flux", n, aliases, params)
    entropy: Expr = _parse_all(doc, "entropy", n, aliases, params)
    q = _parse_all(doc, "entropy_flux", n, aliases, params) if doc.get("entropy_flux") else None
    domain = [parse(str(src), n, aliases, params) for src in (doc.get("domain") or [])]

    def flux_fn(u):
        return np.array([eval_value(e, u, params) for e in flux])

    def jacobian(u):
        return np.array([eval_jet(e, u, params).gradient for e in flux])

    def entropy_fn(u):
        return eval_value(entropy, u, params)

    def gradient(u):
        return eval_jet(entropy, u, params).gradient

    def hessian(u):
        return eval_jet(entropy, u, params).hessian

    def state_domain(u):
        try:
            return all(eval_value(e, u, params) > 0 for e in domain)
        except ExprDomainError:
            return False

    model = SystemModel(
        n=n,
        flux=flux_fn,
        jacobian=jacobian,
        entropy=entropy_fn,
        entropy_gradient=gradient,
        entropy_hessian=hessian,
        entropy_flux=(lambda u: eval_value(q, u, params)) if q is not None else None,
        state_domain=state_domain,
        name=str(doc.get("name", "expression_system")),
    )
    if validate:
        samples = doc.get("samples") or []
        if not samples:
            raise SystemConfigError("system document needs 'samples' to validate the entropy structure")
        report = validate_system(model, samples)
        for state, message in report.failures:
            raise SystemValidationError(f"{message} at sample state {state.tolist()}", state)
    return model
