"""1-Hugoniot curves by pseudo-arclength continuation.

The unknowns are ``x = (S, sigma)`` in R^{n+1} and the equations are the n
jump relations ``G(S, sigma) = sigma (S - u) - (f(S) - f(u)) = 0``.  The
parameter ``s`` is pseudo-arclength in the Euclidean metric on (S, sigma);
tangents ``(S', sigma')`` are unit vectors in that metric.

``G`` vanishes identically on the trivial branch ``S = u``, which crosses the
shock branch at the seed.  The corrector therefore works with ``G / |S - u|``
so Newton cannot slide onto the trivial branch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .model import (
    DomainError,
    EvaluationError,
    HugoniotCurve,
    HugoniotPoint,
    ShockAuditError,
    SpectralError,
    SystemModel,
)
from .spectral import eigen_decompose, lax_margins

log = logging.getLogger(__name__)

RANK_TOL = 1e-12
TURN_COS = 0.9


class ContinuationError(ShockAuditError):
    """Continuation could not proceed; ``curve`` holds the points accepted so far."""

    def __init__(self, message: str, curve: Optional[HugoniotCurve] = None):
        super().__init__(message)
        self.curve = curve


class ContinuationStalled(ContinuationError):
    pass


class RankDeficiency(ContinuationError):
    pass


class TargetNotFound(ShockAuditError):
    pass


@dataclass(frozen=True)
class ContinuationConfig:
    h0: float = 1e-3
    h_min: float = 1e-9
    h_max: float = 0.1
    tol_rh: float = 1e-11
    max_arclength: float = 2.0
    max_newton_iters: int = 12
    family: int = 1
    # Stop once a Lax margin drops below -lax_band * max(1, |sigma|).
    require_lax: bool = True
    lax_band: float = 1e-10

    def __post_init__(self):
        if not (0 < self.h_min <= self.h0 <= self.h_max):
            raise ValueError(f"need 0 < h_min <= h0 <= h_max, got {self.h_min}, {self.h0}, {self.h_max}")
        if not self.tol_rh > 0:
            raise ValueError("tol_rh must be positive")
        if self.max_arclength < 0:
            raise ValueError("max_arclength must be nonnegative")
        if self.family != 1:
            raise ValueError("only the 1-family is supported; trace family n by negating the flux")

    def replace(self, **changes) -> "ContinuationConfig":
        return replace(self, **changes)


class _StepFailure(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _tangent_vector(point: HugoniotPoint) -> np.ndarray:
    return np.append(point.state_tangent, point.speed_tangent)


def genuine_nonlinearity(model: SystemModel, u) -> float:
    """``grad a_1 . r_1`` at ``u`` by central differences of ``a_1`` along ``r_1``."""
    u = model.check_state(u)
    r1 = eigen_decompose(model, u).r(1)
    delta = 1e-4 * max(1.0, float(np.linalg.norm(u))) / float(np.linalg.norm(r1))
    for _ in range(30):
        try:
            a_plus = eigen_decompose(model, u + delta * r1).a(1)
            a_minus = eigen_decompose(model, u - delta * r1).a(1)
            return (a_plus - a_minus) / (2 * delta)
        except (DomainError, EvaluationError):
            delta /= 4
    raise DomainError(f"cannot difference a_1 along r_1 inside the domain at {u.tolist()}")


def _is_degenerate(kappa: float, model: SystemModel, u) -> bool:
    return abs(kappa) <= 1e-7 * max(1.0, float(np.linalg.norm(model.A(u), 2)))


def seed_curve(model: SystemModel, u, orientation: Optional[int] = None) -> HugoniotPoint:
    """Base point ``s = 0``: ``S = u``, ``sigma = a_1(u)``, tangent along ``(r_1, kappa/2)``.

    With ``orientation=None`` the sign is chosen so that sigma decreases
    (``sigma' < 0``) for a genuinely nonlinear field, and +1 otherwise.
    """
    u = model.check_state(u)
    spec = eigen_decompose(model, u)
    kappa = genuine_nonlinearity(model, u)
    if orientation is None:
        orientation = 1 if _is_degenerate(kappa, model, u) else -int(np.sign(kappa))
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    t = orientation * np.append(spec.r(1), 0.5 * kappa)
    t /= np.linalg.norm(t)
    return HugoniotPoint(s=0.0, state=u.copy(), speed=spec.a(1), state_tangent=t[:-1], speed_tangent=float(t[-1]))


def _correct(model: SystemModel, u: np.ndarray, anchor: np.ndarray, t: np.ndarray, tau: float,
             cfg: ContinuationConfig) -> tuple[np.ndarray, int]:
    """Newton on ``[G/|S-u|, t.(x - anchor) - tau] = 0`` from ``anchor + tau t``."""
    n = model.n
    x = anchor + tau * t
    polished = False
    for it in range(cfg.max_newton_iters + 1):
        S, sigma = x[:n], x[n]
        if not (np.all(np.isfinite(x)) and model.admissible(S)):
            raise _StepFailure("domain")
        d = S - u
        rho = float(np.linalg.norm(d))
        if rho == 0.0:
            raise _StepFailure("collapsed onto the left state")
        try:
            df = model.f(S) - model.f(u)
            A = model.A(S)
        except (DomainError, EvaluationError):
            raise _StepFailure("domain") from None
        G = sigma * d - df
        if polished:
            return x, it - 1
        converged = np.linalg.norm(G) <= cfg.tol_rh * (1.0 + np.linalg.norm(df))
        dhat = d / rho
        J = np.empty((n + 1, n + 1))
        J[:n, :n] = (sigma * np.eye(n) - A) / rho - np.outer(G / rho, dhat) / rho
        J[:n, n] = dhat
        J[n, :] = t
        F = np.append(G / rho, t @ (x - anchor) - tau)
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise _StepFailure("singular corrector") from None
        x = x + dx
        if converged:
            polished = True
    raise _StepFailure("no convergence")


def _null_tangent(model: SystemModel, u: np.ndarray, x: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """Unit null vector of ``[sigma I - A(S) | S - u]`` oriented along ``previous``."""
    n = model.n
    S, sigma = x[:n], x[n]
    DG = np.column_stack([sigma * np.eye(n) - model.A(S), S - u])
    _, sv, Vt = np.linalg.svd(DG)
    if sv[-1] <= RANK_TOL * sv[0]:
        raise _StepFailure("rank")
    t = Vt[-1]
    return -t if t @ previous < 0 else t


def advance(model: SystemModel, u, point: HugoniotPoint, tau: float,
            config: Optional[ContinuationConfig] = None) -> HugoniotPoint:
    """Curve point at parameter ``point.s + tau`` (``tau`` may be negative).

    Solved on the hyperplane ``t.(x - x_point) = tau`` with ``t`` the unit
    tangent at ``point``, so that ``d x / d tau = t`` at ``tau = 0``.
    """
    cfg = config or ContinuationConfig()
    u = np.asarray(u, dtype=float)
    if tau == 0.0:
        return point
    t = _tangent_vector(point)
    anchor = np.append(point.state, point.speed)
    try:
        x, _ = _correct(model, u, anchor, t, tau, cfg)
        t_new = _null_tangent(model, u, x, t)
    except _StepFailure as exc:
        raise ContinuationError(f"corrector failed at s={point.s + tau!r}: {exc.reason}") from None
    return HugoniotPoint(s=point.s + tau, state=x[:-1], speed=float(x[-1]),
                         state_tangent=t_new[:-1], speed_tangent=float(t_new[-1]))


def extend_curve(model: SystemModel, curve: HugoniotCurve,
                 config: Optional[ContinuationConfig] = None) -> HugoniotCurve:
    """Continue ``curve`` until ``max_arclength`` or a stopping condition.

    Normal stops (recorded in ``stop_reason``): arclength reached, domain
    boundary, loss of the Lax 1-shock structure, spectral failure at a new
    state.  Raises ContinuationStalled when the corrector fails at ``h_min``
    and RankDeficiency when the linearized jump relations lose rank; both
    carry the partial curve.
    """
    cfg = config or ContinuationConfig()
    if not curve.points:
        raise ValueError("curve must be seeded before it can be extended")
    u = np.asarray(curve.left_state, dtype=float)
    pts = list(curve.points)
    a1_left = eigen_decompose(model, u).a(1)
    h = cfg.h0 if len(pts) < 2 else min(cfg.h_max, max(cfg.h_min, pts[-1].s - pts[-2].s))
    reason = "max_arclength"
    last_failure = ""
    while True:
        last = pts[-1]
        remaining = cfg.max_arclength - last.s
        if remaining <= 1e-14 * max(1.0, cfg.max_arclength):
            reason = "max_arclength"
            break
        if h < cfg.h_min:
            partial = curve.with_points(pts, stop_reason=f"stalled: {last_failure}")
            if last_failure == "domain":
                reason = "domain boundary"
                break
            raise ContinuationStalled(f"continuation stalled at s={last.s!r} ({last_failure})", partial)
        tau = min(h, remaining)
        t = _tangent_vector(last)
        anchor = np.append(last.state, last.speed)
        try:
            x, iters = _correct(model, u, anchor, t, tau, cfg)
            if np.linalg.norm(x - anchor) > 2.0 * tau + 1e-14:
                raise _StepFailure("jumped branches")
            t_new = _null_tangent(model, u, x, t)
            if t_new @ t < TURN_COS and tau > 4 * cfg.h_min:
                raise _StepFailure("tangent turned too sharply")
        except _StepFailure as exc:
            if exc.reason == "rank":
                partial = curve.with_points(pts, stop_reason="rank deficiency")
                raise RankDeficiency(
                    f"linearized RH not uniquely solvable near s={last.s + tau!r}", partial
                ) from None
            last_failure = exc.reason
            h = tau / 2
            continue
        S, sigma = x[:-1], float(x[-1])
        new = HugoniotPoint(s=last.s + tau, state=S, speed=sigma,
                            state_tangent=t_new[:-1], speed_tangent=float(t_new[-1]))
        try:
            spec_S = eigen_decompose(model, S)
        except SpectralError as exc:
            reason = f"spectral failure: {exc}"
            break
        if cfg.require_lax:
            margins = lax_margins(np.array([a1_left]), spec_S.eigenvalues, sigma)
            if np.min(margins) < -cfg.lax_band * max(1.0, abs(sigma)):
                reason = "Lax 1-shock structure lost"
                break
        pts.append(new)
        if iters <= 3:
            h = min(2 * tau, cfg.h_max)
        else:
            h = tau
    log.debug("curve from %s stopped after %d points: %s", u.tolist(), len(pts), reason)
    return curve.with_points(pts, stop_reason=reason)


def trace_hugoniot(model: SystemModel, u, config: Optional[ContinuationConfig] = None,
                   orientation: Optional[int] = None) -> HugoniotCurve:
    """Seed at ``u`` and continue along one branch."""
    u = model.check_state(u)
    seed = seed_curve(model, u, orientation)
    kappa = genuine_nonlinearity(model, u)
    o = int(np.sign(seed.state_tangent @ eigen_decompose(model, u).r(1))) or 1
    curve = HugoniotCurve(left_state=u.copy(), points=(seed,), family=1,
                          genuinely_nonlinear=not _is_degenerate(kappa, model, u), orientation=o)
    return extend_curve(model, curve, config)


def trace_branches(model: SystemModel, u, config: Optional[ContinuationConfig] = None) -> list:
    """One curve for a genuinely nonlinear field; both orientations otherwise."""
    u = model.check_state(u)
    kappa = genuine_nonlinearity(model, u)
    if not _is_degenerate(kappa, model, u):
        return [trace_hugoniot(model, u, config)]
    log.warning("1-field not genuinely nonlinear at %s; tracing both orientations", u.tolist())
    return [trace_hugoniot(model, u, config, orientation=o) for o in (1, -1)]


def point_at(model: SystemModel, curve: HugoniotCurve, s: float,
             config: Optional[ContinuationConfig] = None) -> HugoniotPoint:
    """Point at parameter ``s`` by correcting from the preceding sample."""
    pts = curve.points
    if not pts or s < 0 or s > pts[-1].s + 1e-14:
        raise TargetNotFound(f"s={s!r} beyond traced range [0, {curve.arclength!r}]")
    k = int(np.searchsorted([p.s for p in pts], s, side="right")) - 1
    k = max(0, min(k, len(pts) - 1))
    if s == pts[k].s:
        return pts[k]
    return advance(model, curve.left_state, pts[k], s - pts[k].s, config)


def locate_parameter(model: SystemModel, curve: HugoniotCurve, predicate: Callable[[HugoniotPoint], float],
                     config: Optional[ContinuationConfig] = None, tol: float = 1e-12) -> HugoniotPoint:
    """First point where ``predicate`` vanishes, refined by bisection in ``s``.

    ``predicate`` maps a point to a real number; the target is a sign change
    (or exact zero) between consecutive samples.
    """
    pts = curve.points
    values = [predicate(p) for p in pts]
    for k, v in enumerate(values):
        if v == 0:
            return pts[k]
        if k + 1 < len(values) and np.sign(v) * np.sign(values[k + 1]) < 0:
            break
    else:
        raise TargetNotFound("target not on traced segment")
    base = pts[k]
    lo, hi = 0.0, pts[k + 1].s - base.s
    g_lo = v
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = predicate(advance(model, curve.left_state, base, mid, config))
        if g_mid == 0:
            lo = hi = mid
            break
        if np.sign(g_mid) == np.sign(g_lo):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return advance(model, curve.left_state, base, 0.5 * (lo + hi), config)
