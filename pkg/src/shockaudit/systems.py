"""Built-in systems with analytic derivatives and closed-form 1-shock loci."""

from __future__ import annotations

import math
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from .model import ShockAuditError, SystemModel, as_state


class CatalogError(ShockAuditError):
    pass


class NotOnShockBranch(ShockAuditError):
    pass


def burgers() -> SystemModel:
    return SystemModel(
        n=1,
        flux=lambda u: 0.5 * u**2,
        jacobian=lambda u: np.array([[u[0]]]),
        entropy=lambda u: 0.5 * u[0] ** 2,
        entropy_gradient=lambda u: np.array([u[0]]),
        entropy_hessian=lambda u: np.array([[1.0]]),
        entropy_flux=lambda u: u[0] ** 3 / 3.0,
        name="burgers",
    )


def p_system(k: float = 1.0, gamma: float = 1.4) -> SystemModel:
    """Isentropic gas in Lagrangian coordinates, states ``(v, u)``, ``p = k v^-gamma``."""
    if not (k > 0 and gamma > 1):
        raise CatalogError(f"p_system needs k > 0 and gamma > 1, got k={k}, gamma={gamma}")

    def pressure(v):
        return k * v ** (-gamma)

    def dpressure(v):
        return -gamma * k * v ** (-gamma - 1)

    return SystemModel(
        n=2,
        flux=lambda w: np.array([-w[1], pressure(w[0])]),
        jacobian=lambda w: np.array([[0.0, -1.0], [dpressure(w[0]), 0.0]]),
        entropy=lambda w: 0.5 * w[1] ** 2 + k * w[0] ** (1 - gamma) / (gamma - 1),
        entropy_gradient=lambda w: np.array([-pressure(w[0]), w[1]]),
        entropy_hessian=lambda w: np.array([[-dpressure(w[0]), 0.0], [0.0, 1.0]]),
        entropy_flux=lambda w: w[1] * pressure(w[0]),
        state_domain=lambda w: w[0] > 0,
        name="p_system",
    )


def euler_ideal(gamma: float = 1.4) -> SystemModel:
    """1-d Euler equations in ``(rho, m, E)`` for a gamma-law gas.

    Entropy ``eta = -rho * log(p rho^-gamma) / (gamma - 1)``; the factor
    ``1/(gamma - 1)`` makes the entropy variables the usual ones.
    """
    if not gamma > 1:
        raise CatalogError(f"euler_ideal needs gamma > 1, got {gamma}")
    gm1 = gamma - 1.0

    def prim(w):
        rho, m, E = w
        vel = m / rho
        return rho, vel, gm1 * (E - 0.5 * m * vel)

    def flux(w):
        rho, vel, p = prim(w)
        return np.array([w[1], w[1] * vel + p, (w[2] + p) * vel])

    def jacobian(w):
        rho, vel, _ = prim(w)
        E = w[2]
        return np.array([
            [0.0, 1.0, 0.0],
            [0.5 * (gamma - 3) * vel**2, (3 - gamma) * vel, gm1],
            [gm1 * vel**3 - gamma * E * vel / rho, gamma * E / rho - 1.5 * gm1 * vel**2, gamma * vel],
        ])

    def phys_entropy(w):
        rho, _, p = prim(w)
        return math.log(p) - gamma * math.log(rho)

    def entropy(w):
        return -w[0] * phys_entropy(w) / gm1

    def gradient(w):
        rho, vel, p = prim(w)
        return np.array([(gamma - phys_entropy(w)) / gm1 - 0.5 * rho * vel**2 / p, rho * vel / p, -rho / p])

    def hessian(w):
        rho, vel, p = prim(w)
        p2 = p * p
        h11 = (gm1**2 * rho**2 * vel**4 + 4 * gamma * p2) / (4 * p2 * rho * gm1)
        h12 = -gm1 * rho * vel**3 / (2 * p2)
        h13 = (0.5 * gm1 * rho * vel**2 - p) / p2
        h22 = (p + gm1 * rho * vel**2) / p2
        h23 = -gm1 * rho * vel / p2
        h33 = gm1 * rho / p2
        return np.array([[h11, h12, h13], [h12, h22, h23], [h13, h23, h33]])

    def domain(w):
        return w[0] > 0 and prim(w)[2] > 0

    return SystemModel(
        n=3,
        flux=flux,
        jacobian=jacobian,
        entropy=entropy,
        entropy_gradient=gradient,
        entropy_hessian=hessian,
        entropy_flux=lambda w: entropy(w) * w[1] / w[0],
        state_domain=domain,
        name="euler_ideal",
    )


def shallow_water(g: float = 9.81) -> SystemModel:
    """Shallow water in ``(h, hu)`` with energy entropy ``h u^2/2 + g h^2/2``."""
    if not g > 0:
        raise CatalogError(f"shallow_water needs g > 0, got {g}")

    def flux(w):
        h, m = w
        return np.array([m, m * m / h + 0.5 * g * h * h])

    def jacobian(w):
        h, m = w
        vel = m / h
        return np.array([[0.0, 1.0], [g * h - vel * vel, 2 * vel]])

    def entropy(w):
        h, m = w
        return 0.5 * m * m / h + 0.5 * g * h * h

    def gradient(w):
        h, m = w
        vel = m / h
        return np.array([g * h - 0.5 * vel * vel, vel])

    def hessian(w):
        h, m = w
        vel = m / h
        return np.array([[g + vel * vel / h, -vel / h], [-vel / h, 1.0 / h]])

    def entropy_flux(w):
        h, m = w
        vel = m / h
        return vel * (0.5 * h * vel * vel + g * h * h)

    return SystemModel(
        n=2,
        flux=flux,
        jacobian=jacobian,
        entropy=entropy,
        entropy_gradient=gradient,
        entropy_hessian=hessian,
        entropy_flux=entropy_flux,
        state_domain=lambda w: w[0] > 0,
        name="shallow_water",
    )


_BUILDERS: Dict[str, Callable[..., SystemModel]] = {
    "burgers": burgers,
    "p_system": p_system,
    "euler_ideal": euler_ideal,
    "shallow_water": shallow_water,
}

PARAMETER_KEYS: Dict[str, tuple] = {
    "burgers": (),
    "p_system": ("k", "gamma"),
    "euler_ideal": ("gamma",),
    "shallow_water": ("g",),
}

# Human-readable aliases accepted in configs and on the command line.
_PARAM_ALIASES = {"γ": "gamma"}


def catalog_names() -> list:
    return sorted(_BUILDERS)


def catalog_lookup(name: str, params: Optional[Mapping[str, float]] = None) -> SystemModel:
    if name not in _BUILDERS:
        raise CatalogError(f"unknown system {name!r}; known: {', '.join(catalog_names())}")
    kwargs = {}
    for key, value in (params or {}).items():
        key = _PARAM_ALIASES.get(key, key)
        if key not in PARAMETER_KEYS[name]:
            raise CatalogError(f"system {name!r} has no parameter {key!r}; expected {PARAMETER_KEYS[name]}")
        try:
            kwargs[key] = float(value)
        except (TypeError, ValueError):
            raise CatalogError(f"parameter {key!r} must be a number, got {value!r}") from None
    return _BUILDERS[name](**kwargs)


def _params(name: str, params: Optional[Mapping[str, float]]) -> dict:
    defaults = {"p_system": {"k": 1.0, "gamma": 1.4}, "euler_ideal": {"gamma": 1.4}, "shallow_water": {"g": 9.81}}
    out = dict(defaults.get(name, {}))
    for key, value in (params or {}).items():
        out[_PARAM_ALIASES.get(key, key)] = float(value)
    return out


def analytic_hugoniot(name: str, params: Optional[Mapping[str, float]], u, target: float):
    """Closed-form 1-shock ``(S, sigma)`` from left state ``u``.

    ``target`` is the shared coordinate of the right state: ``S`` itself for
    burgers, specific volume ``v`` for p_system, pressure for euler_ideal and
    depth ``h`` for shallow_water.  Raises NotOnShockBranch for targets on the
    rarefaction side.
    """
    prm = _params(name, params)
    if name == "burgers":
        u0 = float(as_state(u, 1)[0])
        if target > u0:
            raise NotOnShockBranch(f"S={target} > u={u0} is not on the shock branch")
        return np.array([float(target)]), 0.5 * (u0 + target)

    if name == "p_system":
        k, gamma = prm["k"], prm["gamma"]
        v0, u0 = as_state(u, 2)
        v = float(target)
        if v > v0 or v <= 0:
            raise NotOnShockBranch(f"v={v} is not on the compressive branch from v={v0}")
        if v == v0:
            return np.array([v0, u0]), -math.sqrt(gamma * k * v0 ** (-gamma - 1))
        dp = k * v ** (-gamma) - k * v0 ** (-gamma)
        sigma = -math.sqrt(-dp / (v - v0))
        return np.array([v, u0 - sigma * (v - v0)]), sigma

    if name == "euler_ideal":
        gamma = prm["gamma"]
        rho0, m0, E0 = as_state(u, 3)
        u0 = m0 / rho0
        p0 = (gamma - 1) * (E0 - 0.5 * m0 * u0)
        c0 = math.sqrt(gamma * p0 / rho0)
        p = float(target)
        if p < p0:
            raise NotOnShockBranch(f"p={p} < p_left={p0} is not on the shock branch")
        mu = (gamma - 1) / (gamma + 1)
        ratio = p / p0
        rho = rho0 * (ratio + mu) / (mu * ratio + 1)
        a_coef = 2.0 / ((gamma + 1) * rho0)
        b_coef = mu * p0
        vel = u0 - (p - p0) * math.sqrt(a_coef / (p + b_coef))
        sigma = u0 - c0 * math.sqrt((gamma + 1) / (2 * gamma) * ratio + (gamma - 1) / (2 * gamma))
        E = p / (gamma - 1) + 0.5 * rho * vel * vel
        return np.array([rho, rho * vel, E]), sigma

    if name == "shallow_water":
        g = prm["g"]
        h0, m0 = as_state(u, 2)
        u0 = m0 / h0
        h = float(target)
        if h < h0:
            raise NotOnShockBranch(f"h={h} < h_left={h0} is not on the shock branch")
        if h == h0:
            return np.array([h0, m0]), u0 - math.sqrt(g * h0)
        vel = u0 - (h - h0) * math.sqrt(0.5 * g * (1.0 / h + 1.0 / h0))
        sigma = (h * vel - m0) / (h - h0)
        return np.array([h, h * vel]), sigma

    raise CatalogError(f"no closed-form Hugoniot locus for {name!r}")


def shared_coordinate(name: str, params: Optional[Mapping[str, float]], state) -> float:
    """The coordinate ``analytic_hugoniot`` expects, read off a state."""
    prm = _params(name, params)
    state = np.asarray(state, dtype=float)
    if name == "burgers":
        return float(state[0])
    if name in ("p_system", "shallow_water"):
        return float(state[0])
    if name == "euler_ideal":
        rho, m, E = state
        return float((prm["gamma"] - 1) * (E - 0.5 * m * m / rho))
    raise CatalogError(f"no closed-form Hugoniot locus for {name!r}")


def sample_states(name: str, params: Optional[Mapping[str, float]], count: int, rng: np.random.Generator) -> np.ndarray:
    """Random admissible states on a desk-scale box for the given system."""
    if name == "burgers":
        return rng.uniform(-3, 3, size=(count, 1))
    if name == "p_system":
        return np.column_stack([rng.uniform(0.2, 3.0, count), rng.uniform(-2, 2, count)])
    if name == "euler_ideal":
        gamma = _params(name, params)["gamma"]
        rho = rng.uniform(0.2, 3.0, count)
        vel = rng.uniform(-2, 2, count)
        p = rng.uniform(0.2, 3.0, count)
        return np.column_stack([rho, rho * vel, p / (gamma - 1) + 0.5 * rho * vel**2])
    if name == "shallow_water":
        h = rng.uniform(0.2, 3.0, count)
        return np.column_stack([h, h * rng.uniform(-2, 2, count)])
    raise CatalogError(f"unknown system {name!r}")
