"""Limiting bias, variance and cost of a constant-gain tracker.

For a Hurwitz closed loop ``a - qA`` the normalized tracking error settles to

* bias ``M = -L (a - qA)^{-1} b`` (worst-case constant drift of ``f^(k)``),
* covariance ``P`` solving ``(a - qA) P + P (a - qA)^T + sigma^2 q q^T = 0``,

and the cost is ``trace(P) + |M|^2``.  Only these n -> infinity limits are
modelled; the finite-n behaviour is measured by :mod:`smoothtrack.simulation`.
The vanishing correction ``L q / ((k+1)! n^k)`` to the drift is omitted.
"""

import dataclasses

import numpy as np

from ._config import get_tolerances
from .design import build_structure, closed_loop
from .exceptions import DegenerateGainError
from .linalg import solve_linear, solve_lyapunov
from .validation import check_gain, check_positive

__all__ = [
    "RiskDecomposition",
    "bias_vector",
    "bias_vector_solve",
    "variance_matrix",
    "cost",
    "risk_decomposition",
]


@dataclasses.dataclass(frozen=True)
class RiskDecomposition:
    q: np.ndarray
    L: float
    sigma: float
    bias: np.ndarray
    variance: np.ndarray
    cost: float


def _check_last(q):
    if abs(q[-1]) < get_tolerances().degenerate_gain:
        raise DegenerateGainError(f"last gain entry {q[-1]!r} is too close to zero")


def bias_vector(q, L):
    """Closed form ``(L/q_k, L q_0/q_k, ..., L q_{k-1}/q_k)``."""
    q = check_gain(q)
    L = check_positive(L, "L", allow_zero=True)
    _check_last(q)
    return L * np.concatenate(([1.0], q[:-1])) / q[-1]


def bias_vector_solve(q, L):
    """Same bias computed as ``-L (a - qA)^{-1} b`` by a linear solve."""
    q = check_gain(q)
    L = check_positive(L, "L", allow_zero=True)
    _check_last(q)
    b = build_structure(q.size - 1).b[:, 0]
    return -L * solve_linear(closed_loop(q), b)


def variance_matrix(q, sigma):
    q = check_gain(q)
    sigma = check_positive(sigma, "sigma", allow_zero=True)
    return solve_lyapunov(closed_loop(q), sigma**2 * np.outer(q, q))


def _bias_energy(q, L):
    return L**2 * (1.0 / q[-1] ** 2 + np.sum((q[:-1] / q[-1]) ** 2))


def cost(q, L, sigma):
    """``trace(P) + L^2 [(1/q_k)^2 + sum_j (q_j/q_k)^2]``."""
    q = check_gain(q)
    L = check_positive(L, "L", allow_zero=True)
    sigma = check_positive(sigma, "sigma", allow_zero=True)
    if L == 0 and sigma == 0:
        return 0.0
    _check_last(q)
    return float(np.trace(variance_matrix(q, sigma)) + _bias_energy(q, L))


def risk_decomposition(q, L, sigma):
    q = check_gain(q)
    M = bias_vector(q, L)
    P = variance_matrix(q, sigma)
    return RiskDecomposition(
        q=q,
        L=float(L),
        sigma=float(sigma),
        bias=M,
        variance=P,
        cost=float(np.trace(P) + M @ M),
    )
