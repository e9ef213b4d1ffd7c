"""Shared data model: conservation-law systems, Hugoniot samples, reports.

Everything here is immutable after construction.  States are 1-d float64
arrays of length ``n``; matrices are dense ``(n, n)`` float64 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Vector = np.ndarray
Matrix = np.ndarray


class ShockAuditError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ShockAuditError):
    """A state lies outside the admissible set of the model."""


class EvaluationError(ShockAuditError):
    """A model callback produced a non-finite value."""


class SpectralError(ShockAuditError):
    """Eigen-structure assumptions (P > 0, strict hyperbolicity) failed."""


def as_state(u, n: Optional[int] = None) -> Vector:
    arr = np.atleast_1d(np.asarray(u, dtype=float)).reshape(-1)
    if n is not None and arr.shape != (n,):
        raise ValueError(f"expected a state of dimension {n}, got shape {arr.shape}")
    return arr


def _always(_u: Vector) -> bool:
    return True


@dataclass(frozen=True)
class SystemModel:
    """A system ``u_t + f(u)_x = 0`` with a convex entropy pair.

    ``entropy_flux`` is optional; only the entropy-dissipation check uses it.
    ``state_domain`` returns True for admissible states (e.g. ``v > 0``).
    """

    n: int
    flux: Callable[[Vector], Vector]
    jacobian: Callable[[Vector], Matrix]
    entropy: Callable[[Vector], float]
    entropy_gradient: Callable[[Vector], Vector]
    entropy_hessian: Callable[[Vector], Matrix]
    entropy_flux: Optional[Callable[[Vector], float]] = None
    state_domain: Callable[[Vector], bool] = _always
    name: str = "custom"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n!r}")

    # Checked evaluations.  All of them reject inadmissible and non-finite
    # input/output so the numerical layers never propagate NaNs silently.

    def check_state(self, u) -> Vector:
        u = as_state(u, self.n)
        if not np.all(np.isfinite(u)):
            raise EvaluationError(f"non-finite state {u.tolist()}")
        if not self.state_domain(u):
            raise DomainError(f"state {u.tolist()} is outside the admissible domain of {self.name}")
        return u

    def f(self, u) -> Vector:
        return _finite(np.asarray(self.flux(self.check_state(u)), dtype=float).reshape(self.n), "flux", u)

    def A(self, u) -> Matrix:
        return _finite(
            np.asarray(self.jacobian(self.check_state(u)), dtype=float).reshape(self.n, self.n),
            "jacobian",
            u,
        )

    def eta(self, u) -> float:
        return float(_finite(np.asarray(self.entropy(self.check_state(u)), dtype=float), "entropy", u))

    def grad_eta(self, u) -> Vector:
        return _finite(
            np.asarray(self.entropy_gradient(self.check_state(u)), dtype=float).reshape(self.n),
            "entropy gradient",
            u,
        )

    def P(self, u) -> Matrix:
        return _finite(
            np.asarray(self.entropy_hessian(self.check_state(u)), dtype=float).reshape(self.n, self.n),
            "entropy Hessian",
            u,
        )

    def q(self, u) -> float:
        if self.entropy_flux is None:
            raise EvaluationError("entropy flux unavailable")
        return float(_finite(np.asarray(self.entropy_flux(self.check_state(u)), dtype=float), "entropy flux", u))

    @property
    def has_entropy_flux(self) -> bool:
        return self.entropy_flux is not None

    def admissible(self, u) -> bool:
        u = as_state(u, self.n)
        return bool(np.all(np.isfinite(u)) and self.state_domain(u))


def _finite(value, what: str, u):
    if not np.all(np.isfinite(value)):
        raise EvaluationError(f"{what} is not finite at state {np.asarray(u).tolist()}")
    return value


@dataclass(frozen=True)
class HugoniotPoint:
    """One sample ``(s, S_u(s), sigma(s))`` with its unit tangent ``(S', sigma')``."""

    s: float
    state: Vector
    speed: float
    state_tangent: Vector
    speed_tangent: float

    def rh_residual(self, model: SystemModel, left_state: Vector) -> float:
        """Scaled Rankine-Hugoniot residual relative to ``left_state``."""
        df = model.f(self.state) - model.f(left_state)
        res = self.speed * (self.state - left_state) - df
        return float(np.linalg.norm(res) / (1.0 + np.linalg.norm(df)))

    def lrh_residual(self, model: SystemModel, left_state: Vector) -> float:
        """Residual of the linearized jump relation ``sigma'(S-u) = (A(S)-sigma) S'``."""
        A = model.A(self.state)
        lhs = self.speed_tangent * (self.state - left_state)
        rhs = A @ self.state_tangent - self.speed * self.state_tangent
        return float(np.linalg.norm(lhs - rhs))


@dataclass(frozen=True)
class HugoniotCurve:
    left_state: Vector
    points: tuple = ()
    family: int = 1
    stop_reason: str = ""
    genuinely_nonlinear: bool = True
    orientation: int = 1

    def __len__(self) -> int:
        return len(self.points)

    @property
    def arclength(self) -> float:
        return self.points[-1].s if self.points else 0.0

    def with_points(self, points: Sequence[HugoniotPoint], stop_reason: Optional[str] = None) -> "HugoniotCurve":
        return HugoniotCurve(
            left_state=self.left_state,
            points=tuple(points),
            family=self.family,
            stop_reason=self.stop_reason if stop_reason is None else stop_reason,
            genuinely_nonlinear=self.genuinely_nonlinear,
            orientation=self.orientation,
        )


@dataclass(frozen=True)
class SpectralData:
    """Ascending eigenvalues and P-orthonormal eigenvectors (columns) at ``state``."""

    state: Vector
    eigenvalues: Vector
    eigenvectors: Matrix

    def r(self, j: int) -> Vector:
        """Eigenvector of family ``j`` (1-based, as in a_1 < ... < a_n)."""
        return self.eigenvectors[:, j - 1]

    def a(self, j: int) -> float:
        return float(self.eigenvalues[j - 1])


@dataclass(frozen=True)
class ConditionReport:
    """Raw criterion values at one curve point plus the derived pass/fail flags.

    ``lopatinski_det`` and ``alpha``/``beta`` are None at the zero-amplitude
    seed; ``dissipation`` is None when the model has no entropy flux.
    """

    left_state: Vector
    point: HugoniotPoint
    lax_margins: Vector
    lopatinski_det: Optional[float]
    rel_entropy: float
    rel_entropy_deriv: float
    speed_deriv: float
    dissipation: Optional[float]
    alpha: Optional[Vector]
    beta: Optional[Vector]
    quadratic_form: Optional[float] = None
    identity_gap: Optional[float] = None
    identity_scale: Optional[float] = None
    flags: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class SampleValidation:
    state: Vector
    residuals: dict
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class ValidationReport:
    model_name: str
    samples: tuple

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.samples)

    @property
    def failures(self) -> list:
        return [(s.state, msg) for s in self.samples for msg in s.failures]


VALIDATION_TOLERANCES = {
    "hessian_asymmetry": 1e-12,
    "pa_asymmetry": 1e-8,
    "jacobian_fd": 1e-6,
    "gradient_fd": 1e-6,
    "hessian_fd": 1e-6,
    "entropy_flux_fd": 1e-6,
}


def central_difference(fun: Callable[[Vector], np.ndarray], u: Vector, h: Optional[float] = None) -> np.ndarray:
    """Central-difference derivative of ``fun`` at ``u``; column ``i`` is d/du_i."""
    u = np.asarray(u, dtype=float)
    cols = []
    for i in range(u.size):
        step = h if h is not None else 1e-5 * max(1.0, abs(u[i]))
        e = np.zeros_like(u)
        e[i] = step
        cols.append((np.asarray(fun(u + e), dtype=float) - np.asarray(fun(u - e), dtype=float)) / (2 * step))
    return np.stack(cols, axis=-1)


def _rel(err: float, scale: float) -> float:
    return err / max(scale, 1.0)


def validate_system(model: SystemModel, samples) -> ValidationReport:
    """Check the entropy structure of ``model`` at each sample state.

    Residuals recorded per sample: Hessian asymmetry, Cholesky success,
    ``P A`` asymmetry, and finite-difference consistency of the Jacobian,
    entropy gradient, entropy Hessian and (if present) entropy flux.
    """
    tol = VALIDATION_TOLERANCES
    results = []
    for raw in samples:
        u = as_state(raw, model.n)
        if not model.admissible(u):
            raise DomainError(f"sample {u.tolist()} is outside the admissible domain of {model.name}")
        A = model.A(u)
        P = model.P(u)
        g = model.grad_eta(u)
        res: dict = {}
        failures = []

        p_norm = np.linalg.norm(P)
        res["hessian_asymmetry"] = float(np.linalg.norm(P - P.T) / max(p_norm, 1e-300))
        if res["hessian_asymmetry"] > tol["hessian_asymmetry"]:
            failures.append("entropy Hessian not symmetric")
        try:
            np.linalg.cholesky(0.5 * (P + P.T))
            res["cholesky"] = 1.0
        except np.linalg.LinAlgError:
            res["cholesky"] = 0.0
            failures.append("entropy Hessian not positive definite")

        PA = P @ A
        pa_norm = np.linalg.norm(PA)
        res["pa_asymmetry"] = float(np.linalg.norm(PA - PA.T) / pa_norm) if pa_norm > 0 else 0.0
        if res["pa_asymmetry"] > tol["pa_asymmetry"]:
            failures.append("P A not symmetric (entropy incompatible with flux)")

        fd_A = central_difference(model.f, u)
        res["jacobian_fd"] = _rel(float(np.linalg.norm(fd_A - A)), float(np.linalg.norm(A)))
        if res["jacobian_fd"] > tol["jacobian_fd"]:
            failures.append("flux Jacobian disagrees with finite differences")

        fd_g = central_difference(lambda w: np.array([model.eta(w)]), u)[0]
        res["gradient_fd"] = _rel(float(np.linalg.norm(fd_g - g)), float(np.linalg.norm(g)))
        if res["gradient_fd"] > tol["gradient_fd"]:
            failures.append("entropy gradient disagrees with finite differences")

        fd_P = central_difference(model.grad_eta, u)
        res["hessian_fd"] = _rel(float(np.linalg.norm(fd_P - P)), float(p_norm))
        if res["hessian_fd"] > tol["hessian_fd"]:
            failures.append("entropy Hessian disagrees with finite differences")

        if model.has_entropy_flux:
            fd_q = central_difference(lambda w: np.array([model.q(w)]), u)[0]
            gA = g @ A
            res["entropy_flux_fd"] = _rel(float(np.linalg.norm(fd_q - gA)), float(np.linalg.norm(gA)))
            if res["entropy_flux_fd"] > tol["entropy_flux_fd"]:
                failures.append("entropy flux incompatible: grad(eta) A != grad(q)")
        results.append(SampleValidation(state=u, residuals=res, failures=tuple(failures)))
    return ValidationReport(model_name=model.name, samples=tuple(results))
