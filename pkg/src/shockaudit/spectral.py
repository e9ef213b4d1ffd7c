"""Eigen-structure through the entropy symmetrizer.

With ``P = L L^T`` the matrix ``M = L^{-1} (P A) L^{-T}`` is symmetric, so a
symmetric eigen-solver gives real eigenvalues and orthonormal ``w_j``; the
right eigenvectors of ``A`` are then ``r_j = L^{-T} w_j`` and satisfy
``<r_i, P r_j> = delta_ij`` by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import SpectralData, SpectralError, SystemModel, as_state

EPS_HYP = 1e-8
EPS_INV = 1e-8
SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class SymmetrizedProblem:
    state: np.ndarray
    matrix: np.ndarray
    symmetrizer: np.ndarray
    cholesky_factor: np.ndarray

    @classmethod
    def build(cls, model: SystemModel, u) -> "SymmetrizedProblem":
        u = model.check_state(u)
        A = model.A(u)
        P = model.P(u)
        try:
            L = np.linalg.cholesky(0.5 * (P + P.T))
        except np.linalg.LinAlgError:
            raise SpectralError(f"entropy Hessian not positive definite at state {u.tolist()}") from None
        return cls(state=u, matrix=A, symmetrizer=P, cholesky_factor=L)

    def symmetric_matrix(self) -> np.ndarray:
        """``L^{-1} (P A) L^{-T}``, unsymmetrized."""
        L = self.cholesky_factor
        PA = self.symmetrizer @ self.matrix
        X = np.linalg.solve(L, PA)
        return np.linalg.solve(L, X.T).T

    def asymmetry(self) -> float:
        M = self.symmetric_matrix()
        return float(np.linalg.norm(M - M.T))


def _scale(A: np.ndarray) -> float:
    return max(float(np.linalg.norm(A, 2)), 1.0)


def eigen_decompose(model: SystemModel, u, eps_hyp: float = EPS_HYP) -> SpectralData:
    """Sorted eigenvalues and P-orthonormal eigenvectors of ``A(u)``.

    Sign convention: the entry of largest magnitude in each eigenvector is
    positive (lowest index wins ties).

    Raises SpectralError if ``P(u)`` is not positive definite, ``P A`` is
    not symmetric, or two eigenvalues are closer than ``eps_hyp * ||A||``.
    """
    prob = SymmetrizedProblem.build(model, u)
    M = prob.symmetric_matrix()
    scale = _scale(prob.matrix)
    if np.linalg.norm(M - M.T) > SYMMETRY_TOL * scale:
        raise SpectralError(f"P A not symmetric at state {prob.state.tolist()}; entropy incompatible with flux")
    vals, W = np.linalg.eigh(0.5 * (M + M.T))
    R = np.linalg.solve(prob.cholesky_factor.T, W)
    if vals.size > 1 and np.min(np.diff(vals)) < eps_hyp * scale:
        raise SpectralError(f"strict hyperbolicity violated at state {prob.state.tolist()}")
    for j in range(R.shape[1]):
        k = int(np.argmax(np.abs(R[:, j])))
        if R[k, j] < 0:
            R[:, j] = -R[:, j]
    return SpectralData(state=prob.state, eigenvalues=vals, eigenvectors=R)


def align_frame(spec: SpectralData, reference: Optional[np.ndarray]) -> SpectralData:
    """Flip eigenvector signs to maximize agreement with a previous frame."""
    if reference is None:
        return spec
    R = spec.eigenvectors.copy()
    for j in range(R.shape[1]):
        if R[:, j] @ reference[:, j] < 0:
            R[:, j] = -R[:, j]
    return SpectralData(state=spec.state, eigenvalues=spec.eigenvalues, eigenvectors=R)


def solve_shifted(model: SystemModel, u, shift: float, rhs, eps_inv: float = EPS_INV,
                  spectrum: Optional[SpectralData] = None) -> np.ndarray:
    """Solve ``(A(u) - shift I) x = rhs``.

    Raises SpectralError when ``shift`` is within ``eps_inv * ||A||`` of an
    eigenvalue of ``A(u)``.
    """
    spec = spectrum if spectrum is not None else eigen_decompose(model, u)
    A = model.A(spec.state)
    if np.min(np.abs(spec.eigenvalues - shift)) < eps_inv * _scale(A):
        raise SpectralError(f"shift {shift!r} resonant with spectrum {spec.eigenvalues.tolist()}")
    rhs = as_state(rhs, model.n)
    return np.linalg.solve(A - shift * np.eye(model.n), rhs)


def p_norm(c: np.ndarray, P: np.ndarray) -> float:
    return float(np.sqrt(c @ P @ c))


def normalized_determinant(columns: Sequence, weights: np.ndarray) -> float:
    """``det(c_1/|c_1|_P, ..., c_n/|c_n|_P)`` with ``|c|_P = sqrt(<c, P c>)``.

    Bounded by ``1/sqrt(det P)`` (Hadamard in the P geometry).
    """
    P = np.asarray(weights, dtype=float)
    cols = []
    for c in columns:
        c = np.asarray(c, dtype=float)
        nrm = p_norm(c, P)
        if not nrm > 0:
            raise ValueError("degenerate column")
        cols.append(c / nrm)
    C = np.column_stack(cols)
    if C.shape[0] != C.shape[1]:
        raise ValueError(f"need n columns of dimension n, got matrix of shape {C.shape}")
    return float(np.linalg.det(C))


def lax_margins(left_eigenvalues: np.ndarray, right_eigenvalues: np.ndarray, speed: float) -> np.ndarray:
    """Slacks of the Lax 1-shock inequalities; all positive for a strict Lax 1-shock.

    ``[a_1(u) - s, s - a_1(S), a_2(S) - s, a_3(S) - a_2(S), ..., a_n(S) - a_{n-1}(S)]``
    (only the first two entries when n = 1).
    """
    a_r = np.asarray(right_eigenvalues, dtype=float)
    out = [left_eigenvalues[0] - speed, speed - a_r[0]]
    if a_r.size > 1:
        out.append(a_r[1] - speed)
        out.extend(np.diff(a_r[1:]).tolist())
    return np.asarray(out, dtype=float)
