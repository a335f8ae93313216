"""Structure matrices, the normalized Riccati solution and the gain family.

The tracked state is ``F = (f, f', ..., f^(k))``.  With the shift matrix
``a``, observation row ``A = (1, 0, ..., 0)`` and input column
``b = (0, ..., 0, 1)^T`` the gain of the stationary Kalman filter driven by
white noise of intensity ``gamma`` on ``f^(k)`` is ``q(gamma) = Q A^T / sigma^2``
where ``Q`` solves::

    a Q + Q a^T + gamma^2 b b^T - Q A^T A Q / sigma^2 = 0.

All such ``Q`` are rescalings of ``U = Q(1, 1)``::

    Q_ij(gamma, sigma) = U_ij sigma^2 (gamma / sigma)^((i + j + 1) / (k + 1))

so ``U`` is computed once per order and cached.
"""

import dataclasses
import functools

import numpy as np
from scipy.special import comb

from ._config import get_tolerances
from .exceptions import ConvergenceError, NumericalError
from .linalg import eigenvalues, solve_lyapunov
from .validation import check_gain, check_order, check_positive

__all__ = [
    "StructureMatrices",
    "NormalizedRiccatiSolution",
    "GainDesign",
    "StabilityReport",
    "build_structure",
    "solve_normalized_riccati",
    "riccati_residual",
    "gain_from_gamma",
    "scaled_riccati_solution",
    "characteristic_coefficients",
    "characteristic_roots",
    "closed_loop",
    "certify",
]


@dataclasses.dataclass(frozen=True)
class StructureMatrices:
    k: int
    a: np.ndarray
    A: np.ndarray
    b: np.ndarray

    @property
    def dim(self):
        return self.k + 1


@dataclasses.dataclass(frozen=True)
class NormalizedRiccatiSolution:
    k: int
    U: np.ndarray
    residual: float
    iterations: int

    @property
    def first_row(self):
        return self.U[0].copy()


@dataclasses.dataclass(frozen=True)
class GainDesign:
    k: int
    gamma: float
    sigma: float
    q: np.ndarray
    closed_loop: np.ndarray
    eigenvalues: np.ndarray
    stable: bool
    distinct: bool

    @classmethod
    def from_gain(cls, q, gamma=float("nan"), sigma=float("nan")):
        """Wrap an arbitrary gain vector, e.g. one not from the Riccati family."""
        q = check_gain(q)
        k = q.size - 1
        F = closed_loop(q)
        w = eigenvalues(F)
        report = _spectrum_report(w)
        return cls(
            k=k,
            gamma=float(gamma),
            sigma=float(sigma),
            q=q,
            closed_loop=F,
            eigenvalues=w,
            stable=report.margin < 0,
            distinct=report.distinct,
        )


@dataclasses.dataclass(frozen=True)
class StabilityReport:
    margin: float
    min_gap: float
    spectral_radius: float
    stable: bool
    distinct: bool

    @property
    def passed(self):
        return self.stable and self.distinct


def build_structure(k):
    """Shift matrix ``a``, observation row ``A`` and input column ``b``."""
    k = check_order(k)
    d = k + 1
    a = np.eye(d, k=1)
    A = np.zeros((1, d))
    A[0, 0] = 1.0
    b = np.zeros((d, 1))
    b[-1, 0] = 1.0
    return StructureMatrices(k=k, a=a, A=A, b=b)


def closed_loop(q):
    """The matrix ``a - q A`` for gain ``q``."""
    q = check_gain(q)
    s = build_structure(q.size - 1)
    return s.a - np.outer(q, s.A[0])


def riccati_residual(Q, gamma, sigma):
    """Max-norm residual of ``aQ + Qa^T + gamma^2 bb^T - QA^TAQ/sigma^2``."""
    Q = np.asarray(Q, dtype=float)
    s = build_structure(Q.shape[0] - 1)
    R = s.a @ Q + Q @ s.a.T + gamma**2 * (s.b @ s.b.T) - Q @ s.A.T @ s.A @ Q / sigma**2
    return float(np.abs(R).max())


@functools.lru_cache(maxsize=None)
def _newton_kleinman(k, tol, max_iter):
    s = build_structure(k)
    bb = s.b @ s.b.T
    # (u + 1)^(k+1) places every closed-loop root at -1
    q = np.array([comb(k + 1, j + 1, exact=True) for j in range(k + 1)], dtype=float)
    residual = np.inf
    for it in range(1, max_iter + 1):
        F = s.a - np.outer(q, s.A[0])
        U = solve_lyapunov(F, bb + np.outer(q, q))
        q = U[:, 0].copy()
        residual = riccati_residual(U, 1.0, 1.0)
        if residual <= tol:
            return U, residual, it
    raise ConvergenceError(
        f"Newton-Kleinman iteration for k={k} stalled at residual {residual:.3e}"
    )


def solve_normalized_riccati(k):
    """Stabilizing solution ``U`` of ``aU + Ua^T + bb^T - UA^TAU = 0``.

    Newton-Kleinman iteration started from the gain whose characteristic
    polynomial is ``(u + 1)^(k+1)``.  Each sweep solves one Lyapunov
    equation; from a stabilizing start the iterates decrease monotonically
    to the unique positive-definite solution.
    """
    k = check_order(k)
    tol = get_tolerances()
    U, residual, iterations = _newton_kleinman(k, tol.riccati_residual, tol.riccati_max_iter)
    return NormalizedRiccatiSolution(k=k, U=U.copy(), residual=residual, iterations=iterations)


def _ratio_powers(k, gamma, sigma):
    gamma = check_positive(gamma, "gamma")
    sigma = check_positive(sigma, "sigma")
    r = gamma / sigma
    return r ** (np.arange(1, 2 * k + 2) / (k + 1))


def gain_from_gamma(U, gamma, sigma):
    """Gain ``q(gamma)`` with ``q_j = U_0j (gamma/sigma)^((j+1)/(k+1))``."""
    if isinstance(U, NormalizedRiccatiSolution):
        U = U.U
    U = np.asarray(U, dtype=float)
    k = U.shape[0] - 1
    powers = _ratio_powers(k, gamma, sigma)
    q = U[0] * powers[: k + 1]
    F = closed_loop(q)
    w = eigenvalues(F)
    report = _spectrum_report(w)
    return GainDesign(
        k=k,
        gamma=float(gamma),
        sigma=float(sigma),
        q=q,
        closed_loop=F,
        eigenvalues=w,
        stable=report.margin < 0,
        distinct=report.distinct,
    )


def scaled_riccati_solution(U, gamma, sigma):
    """Riccati solution ``Q(gamma, sigma)`` obtained by rescaling ``U``."""
    if isinstance(U, NormalizedRiccatiSolution):
        U = U.U
    U = np.asarray(U, dtype=float)
    k = U.shape[0] - 1
    powers = _ratio_powers(k, gamma, sigma)
    idx = np.add.outer(np.arange(k + 1), np.arange(k + 1))
    return U * float(sigma) ** 2 * powers[idx]


def characteristic_coefficients(q):
    """Coefficients of ``u^(k+1) + q_0 u^k + ... + q_k``, highest power first."""
    q = check_gain(q)
    return np.concatenate(([1.0], q))


def _companion(coeffs):
    # bottom-row companion form, deliberately not the a - qA layout
    c = np.asarray(coeffs, dtype=float)
    d = c.size - 1
    C = np.eye(d, k=1)
    C[-1, :] = -c[:0:-1] / c[0]
    return C


def characteristic_roots(q):
    """Roots of the characteristic polynomial via its companion matrix."""
    return eigenvalues(_companion(characteristic_coefficients(q)))


def _spectrum_report(w):
    tol = get_tolerances()
    w = np.asarray(w, dtype=complex)
    margin = float(w.real.max())
    radius = float(np.abs(w).max())
    if w.size > 1:
        gaps = np.abs(w[:, None] - w[None, :])
        gaps[np.diag_indices(w.size)] = np.inf
        min_gap = float(gaps.min())
    else:
        min_gap = float("inf")
    distinct = min_gap > tol.distinct_gap * radius
    stable = margin < -tol.certify_margin
    return StabilityReport(
        margin=margin, min_gap=min_gap, spectral_radius=radius, stable=stable, distinct=distinct
    )


def certify(design):
    """Check that closed-loop roots are distinct with negative real parts.

    ``passed`` is true iff the largest real part is below ``-certify_margin``
    and the smallest pairwise gap exceeds ``distinct_gap`` times the spectral
    radius.  Distinctness is always measured, never assumed.
    """
    if not isinstance(design, GainDesign):
        raise TypeError("certify expects a GainDesign")
    if not np.all(np.isfinite(design.eigenvalues)):
        raise NumericalError("design has non-finite eigenvalues")
    return _spectrum_report(design.eigenvalues)
