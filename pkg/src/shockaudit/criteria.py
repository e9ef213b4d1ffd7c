"""Shock admissibility and stability criteria evaluated at Hugoniot points.

Raw values are always reported; pass/fail flags are derived from them by
``flags_for`` with the band widths of a ``TolerancePolicy``, so any report
can be re-thresholded without recomputation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .hugoniot import ContinuationConfig, TargetNotFound, point_at
from .model import (
    ConditionReport,
    EvaluationError,
    HugoniotCurve,
    HugoniotPoint,
    ShockAuditError,
    SpectralData,
    SystemModel,
)
from .spectral import align_frame, eigen_decompose, lax_margins, normalized_determinant, solve_shifted

EPS_MACH = np.finfo(float).eps


class DegenerateShock(ShockAuditError):
    pass


@dataclass(frozen=True)
class TolerancePolicy:
    """Band half-width for nonstrict inequalities and the Lopatinski threshold."""

    eps_eq: float = 1e-10
    delta_lop: float = 1e-6

    def __post_init__(self):
        if not (self.eps_eq > 0 and self.delta_lop > 0):
            raise ValueError("tolerances must be positive")

    def band(self, reference: float = 1.0) -> float:
        return self.eps_eq * max(1.0, abs(reference))


def relative_entropy(model: SystemModel, u, v) -> float:
    """``eta(u) - eta(v) - grad eta(v) . (u - v)``."""
    u = model.check_state(u)
    v = model.check_state(v)
    return model.eta(u) - model.eta(v) - float(model.grad_eta(v) @ (u - v))


def relative_entropy_derivative(model: SystemModel, u, point: HugoniotPoint) -> float:
    """``d/ds eta(u | S(s))`` in closed form: ``<S', P(S) (S - u)>``."""
    u = np.asarray(u, dtype=float)
    return float(point.state_tangent @ model.P(point.state) @ (point.state - u))


def lax_check(model: SystemModel, u, point: HugoniotPoint, left: Optional[SpectralData] = None,
              right: Optional[SpectralData] = None) -> np.ndarray:
    left = left or eigen_decompose(model, u)
    right = right or eigen_decompose(model, point.state)
    return lax_margins(left.eigenvalues, right.eigenvalues, point.speed)


def _require_shock(u, point: HugoniotPoint):
    if point.s == 0 or not np.any(point.state != np.asarray(u, dtype=float)):
        raise DegenerateShock("degenerate: zero-amplitude shock")


def lopatinski(model: SystemModel, u, point: HugoniotPoint, right: Optional[SpectralData] = None) -> float:
    """Normalized ``det[(S - u), r_2(S), ..., r_n(S)]`` with P(S)-unit columns."""
    _require_shock(u, point)
    right = right or eigen_decompose(model, point.state)
    d = point.state - np.asarray(u, dtype=float)
    cols = [d] + [right.r(j) for j in range(2, model.n + 1)]
    return normalized_determinant(cols, model.P(point.state))


def entropy_dissipation(model: SystemModel, u, point: HugoniotPoint) -> float:
    """``[q] - sigma [eta]``; nonpositive for an entropy-dissipating shock."""
    if not model.has_entropy_flux:
        raise EvaluationError("entropy flux unavailable")
    S = point.state
    return (model.q(S) - model.q(u)) - point.speed * (model.eta(S) - model.eta(u))


@dataclass(frozen=True)
class ProofDiagnostics:
    alpha: np.ndarray
    beta: np.ndarray
    quadratic_form: float
    lrh_residual: float
    identity_gap: float
    identity_scale: float
    expansion_residual: float

    @property
    def alpha1_fraction(self) -> float:
        """``|alpha_1| / |alpha|``; near zero means S - u is almost spanned by r_2..r_n."""
        nrm = float(np.linalg.norm(self.alpha))
        return abs(float(self.alpha[0])) / nrm if nrm > 0 else 0.0


def proof_diagnostics(model: SystemModel, u, point: HugoniotPoint,
                      right: Optional[SpectralData] = None) -> ProofDiagnostics:
    """Eigen-expansion of ``S - u`` and the quadratic-form identity at a shock.

    ``alpha`` solves ``S - u = sum_j alpha_j r_j(S)`` over all j; ``beta_j =
    alpha_j / (a_j(S) - sigma)`` for j >= 2 (``beta[0]`` is NaN).  With
    ``Q = <S', P (A - sigma) S'>`` the identity ``Q = sigma' <S', P (S - u)>``
    holds up to ``identity_scale``, which bounds the lrh residual's effect
    plus rounding.
    """
    _require_shock(u, point)
    u = np.asarray(u, dtype=float)
    right = right or eigen_decompose(model, point.state)
    S, sigma = point.state, point.speed
    Sp, sp = point.state_tangent, point.speed_tangent
    A = model.A(S)
    P = model.P(S)
    d = S - u
    R = right.eigenvectors
    alpha = R.T @ P @ d
    expansion_residual = float(np.linalg.norm(R @ alpha - d))
    beta = np.full(model.n, np.nan)
    for j in range(2, model.n + 1):
        beta[j - 1] = alpha[j - 1] / (right.a(j) - sigma)
    ASp = A @ Sp - sigma * Sp
    Q = float(Sp @ P @ ASp)
    lrh = ASp - sp * d
    PSp = P @ Sp
    rhs = sp * float(PSp @ d)
    nP, nA = np.linalg.norm(P, 2), np.linalg.norm(A, 2)
    nS = float(np.linalg.norm(Sp))
    rounding = model.n * EPS_MACH * (nP * nS * nS * (nA + abs(sigma)) + abs(sp) * nP * nS * np.linalg.norm(d))
    scale = float(np.linalg.norm(PSp) * np.linalg.norm(lrh) + rounding)
    return ProofDiagnostics(
        alpha=alpha,
        beta=beta,
        quadratic_form=Q,
        lrh_residual=float(np.linalg.norm(lrh)),
        identity_gap=abs(Q - rhs),
        identity_scale=scale,
        expansion_residual=expansion_residual,
    )


def beta_from_resolvent(model: SystemModel, u, point: HugoniotPoint, right: SpectralData) -> np.ndarray:
    """``(A - sigma)^{-1} (S - u)`` expanded in the eigenbasis; cross-check for ``beta``."""
    x = solve_shifted(model, point.state, point.speed, point.state - np.asarray(u, dtype=float), spectrum=right)
    return right.eigenvectors.T @ model.P(point.state) @ x


def flags_for(report: ConditionReport, policy: TolerancePolicy) -> dict:
    """Pass/fail flags as a pure function of a report's raw values."""
    pt = report.point
    amplitude = float(np.linalg.norm(pt.state - report.left_state))
    lax = bool(np.all(report.lax_margins > policy.band(pt.speed)))
    i_prime = bool(report.speed_deriv <= policy.eps_eq)
    i_prime_strict = bool(report.speed_deriv < -policy.eps_eq)
    ii_prime = bool(report.rel_entropy_deriv >= -policy.band(amplitude))
    lop = None if report.lopatinski_det is None else bool(abs(report.lopatinski_det) > policy.delta_lop)
    dissipative = None if report.dissipation is None else bool(report.dissipation <= policy.band(pt.speed))
    hypotheses = bool(lax and i_prime_strict and ii_prime and report.lopatinski_det is not None)
    flags = {
        "lax": lax,
        "lopatinski": lop,
        "i_prime": i_prime,
        "i_prime_strict": i_prime_strict,
        "ii_prime": ii_prime,
        "dissipative": dissipative,
        "hypotheses": hypotheses,
        "counterexample": bool(hypotheses and lop is False),
    }
    if report.beta is not None and report.alpha is not None and _dim(report) > 1:
        ba = report.beta[1:] * report.alpha[1:]
        flags["beta_alpha_nonnegative"] = bool(np.all(ba >= -policy.eps_eq))
    return flags


def _dim(report: ConditionReport) -> int:
    return int(np.asarray(report.left_state).size)


def evaluate_point(model: SystemModel, u, point: HugoniotPoint, policy: Optional[TolerancePolicy] = None,
                   left: Optional[SpectralData] = None, frame: Optional[np.ndarray] = None,
                   right: Optional[SpectralData] = None) -> ConditionReport:
    """All pointwise criteria at ``point``.

    ``frame`` is a previous eigenvector matrix used to keep eigenvector signs
    (and hence the determinant's sign) continuous along a curve; ``right``
    supplies an already aligned decomposition at ``point.state``.
    """
    policy = policy or TolerancePolicy()
    u = model.check_state(u)
    left = left or eigen_decompose(model, u)
    right = right or align_frame(eigen_decompose(model, point.state), frame)
    margins = lax_check(model, u, point, left, right)
    degenerate = point.s == 0 or not np.any(point.state != u)
    det = alpha = beta = Q = gap = scale = None
    if not degenerate:
        det = lopatinski(model, u, point, right)
        diag = proof_diagnostics(model, u, point, right)
        alpha, beta, Q = diag.alpha, diag.beta, diag.quadratic_form
        gap, scale = diag.identity_gap, diag.identity_scale
    dissipation = entropy_dissipation(model, u, point) if model.has_entropy_flux else None
    report = ConditionReport(
        left_state=u,
        point=point,
        lax_margins=margins,
        lopatinski_det=det,
        rel_entropy=relative_entropy(model, u, point.state),
        rel_entropy_deriv=relative_entropy_derivative(model, u, point),
        speed_deriv=point.speed_tangent,
        dissipation=dissipation,
        alpha=alpha,
        beta=beta,
        quadratic_form=Q,
        identity_gap=gap,
        identity_scale=scale,
    )
    return replace(report, flags=flags_for(report, policy))


def reflag(report: ConditionReport, policy: TolerancePolicy) -> ConditionReport:
    return replace(report, flags=flags_for(report, policy))


@dataclass(frozen=True)
class Condition:
    passed: bool
    worst_margin: float
    worst_s: float


@dataclass(frozen=True)
class LVConditions:
    """Monotonicity conditions along ``[0, s_plus]`` and at ``s_plus``.

    Margins are oriented so that nonnegative means satisfied.
    """

    s_plus: float
    i: Condition
    ii: Condition
    i_prime: Condition
    ii_prime: Condition
    ii_star: Condition

    def as_flags(self) -> dict:
        return {k: getattr(self, k).passed for k in ("i", "ii", "i_prime", "ii_prime", "ii_star")}


def _worst(values: np.ndarray, s: np.ndarray, band: np.ndarray) -> Condition:
    k = int(np.argmin(values))
    return Condition(passed=bool(np.all(values >= -band)), worst_margin=float(values[k]), worst_s=float(s[k]))


def lv_profile(s: np.ndarray, speed_deriv: np.ndarray, rel_entropy_deriv: np.ndarray, rel_entropy: np.ndarray,
               amplitude: np.ndarray, index: int, policy: TolerancePolicy) -> LVConditions:
    """Conditions (i), (ii), (i'), (ii'), (ii*) from sampled profiles.

    ``index`` marks the sample playing the role of ``s_plus``; (i) and (ii)
    use samples ``0..index`` and (ii*) uses every sample given.
    """
    s = np.asarray(s, dtype=float)
    head = slice(0, index + 1)
    eps = policy.eps_eq
    dband = eps * np.maximum(1.0, amplitude)
    i = _worst(-speed_deriv[head], s[head], np.full(index + 1, eps))
    ii = _worst(rel_entropy_deriv[head], s[head], dband[head])
    i_prime = Condition(bool(-speed_deriv[index] >= -eps), float(-speed_deriv[index]), float(s[index]))
    ii_prime = Condition(bool(rel_entropy_deriv[index] >= -dband[index]), float(rel_entropy_deriv[index]),
                         float(s[index]))
    star = (s - s[index]) * (rel_entropy - rel_entropy[index])
    star_band = eps * np.maximum(1.0, np.abs(s - s[index]) * (np.abs(rel_entropy) + abs(rel_entropy[index])))
    ii_star = _worst(star, s, star_band)
    return LVConditions(s_plus=float(s[index]), i=i, ii=ii, i_prime=i_prime, ii_prime=ii_prime, ii_star=ii_star)


def lv_conditions(model: SystemModel, u, curve: HugoniotCurve, s_plus: float,
                  policy: Optional[TolerancePolicy] = None,
                  config: Optional[ContinuationConfig] = None) -> LVConditions:
    """Evaluate the monotonicity conditions on the traced samples of ``[0, s_plus]``.

    (ii*) is checked at every traced sample, including those beyond ``s_plus``.
    """
    policy = policy or TolerancePolicy()
    if s_plus < 0 or s_plus > curve.arclength + 1e-14:
        raise TargetNotFound(f"s_plus={s_plus!r} beyond traced range [0, {curve.arclength!r}]")
    u = np.asarray(u, dtype=float)
    pts = [p for p in curve.points if p.s < s_plus]
    plus = point_at(model, curve, s_plus, config)
    pts.append(plus)
    index = len(pts) - 1
    pts.extend(p for p in curve.points if p.s > s_plus)
    s = np.array([p.s for p in pts])
    sp = np.array([p.speed_tangent for p in pts])
    dseta = np.array([relative_entropy_derivative(model, u, p) for p in pts])
    releta = np.array([relative_entropy(model, u, p.state) for p in pts])
    amp = np.array([np.linalg.norm(p.state - u) for p in pts])
    return lv_profile(s, sp, dseta, releta, amp, index, policy)


def cumulative_flags(reports: Sequence[ConditionReport], policy: TolerancePolicy) -> list:
    """(i), (ii) on ``[0, s_k]`` and (ii*) at every sample, for each ``k``."""
    if not reports:
        return []
    u = np.asarray(reports[0].left_state)
    s = np.array([r.point.s for r in reports])
    sp = np.array([r.speed_deriv for r in reports])
    dseta = np.array([r.rel_entropy_deriv for r in reports])
    releta = np.array([r.rel_entropy for r in reports])
    amp = np.array([np.linalg.norm(r.point.state - u) for r in reports])
    return [lv_profile(s, sp, dseta, releta, amp, k, policy) for k in range(len(reports))]
