"""Small dense linear algebra: solves, eigenvalues, continuous Lyapunov.

All routines are pure functions of their inputs and target the tiny systems
that appear in the filter design (dimension at most ``k + 1 <= 9``).
"""

import warnings

import numpy as np
import scipy.linalg

from ._config import get_tolerances
from .exceptions import ConvergenceError, InstabilityError, SingularMatrixError

__all__ = ["solve_linear", "eigenvalues", "solve_lyapunov", "lyapunov_residual"]


def _as_square(M, name="M"):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
    return M


def solve_linear(M, rhs):
    """Solve ``M x = rhs`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If any pivot of the LU factorisation is smaller in magnitude than
        the ``singular_pivot`` tolerance.
    """
    M = _as_square(M)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != M.shape[0]:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, matrix has {M.shape[0]}")
    with warnings.catch_warnings():
        # singularity is reported below as SingularMatrixError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < get_tolerances().singular_pivot:
        raise SingularMatrixError(f"matrix is singular (smallest pivot {pivots.min():.3e})")
    return scipy.linalg.lu_solve((lu, piv), rhs)


def eigenvalues(M):
    """Eigenvalues of a real square matrix as a complex array.

    The result is sorted by real part, then imaginary part, so repeated calls
    return the same ordering.
    """
    M = _as_square(M)
    limit = get_tolerances().max_dimension
    if M.shape[0] > limit:
        raise ValueError(f"dimension {M.shape[0]} exceeds supported maximum {limit}")
    try:
        w = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}") from exc
    w = np.asarray(w, dtype=complex)
    return w[np.lexsort((w.imag, w.real))]


def solve_lyapunov(F, W):
    """Solve ``F P + P F^T + W = 0`` for symmetric ``P``.

    Uses the Kronecker form ``(I (x) F + F (x) I) vec(P) = -vec(W)`` with
    column-major ``vec``, applied to a diagonally balanced copy of ``F``.  For the dimensions handled here the dense system is
    at most 81 x 81.

    Raises
    ------
    InstabilityError
        If ``F`` has an eigenvalue with real part >= ``-stability_margin``,
        since the solution would not be the stationary covariance.
    """
    F = _as_square(F, "F")
    W = _as_square(W, "W")
    if W.shape != F.shape:
        raise ValueError(f"F has shape {F.shape} but W has shape {W.shape}")
    margin = eigenvalues(F).real.max()
    if margin >= -get_tolerances().stability_margin:
        raise InstabilityError(f"F is not Hurwitz (max real part {margin:.3e})")
    # power-of-two diagonal similarity F = T Fb T^-1; exact, and it evens out
    # the wide range of gain magnitudes along the Riccati family
    Fb, T = scipy.linalg.matrix_balance(F, permute=False)
    t = np.diag(T)
    Wb = W / np.outer(t, t)
    d = F.shape[0]
    eye = np.eye(d)
    K = np.kron(eye, Fb) + np.kron(Fb, eye)
    vec_p = solve_linear(K, -Wb.reshape(-1, order="F"))
    P = vec_p.reshape(d, d, order="F") * np.outer(t, t)
    return 0.5 * (P + P.T)


def lyapunov_residual(F, P, W):
    """Max-norm of ``F P + P F^T + W``."""
    F = np.asarray(F, dtype=float)
    return float(np.abs(F @ P + P @ F.T + W).max())
