"""One-parameter minimization of the tracking cost over the Riccati family."""

import dataclasses
import math

import numpy as np

from ._config import get_tolerances
from .design import certify, gain_from_gamma, solve_normalized_riccati
from .exceptions import BracketError, NumericalError
from .risk import cost
from .validation import check_order, check_positive

__all__ = [
    "DesignProblem",
    "DesignResult",
    "GammaTable",
    "family_cost",
    "golden_section",
    "minimize_gamma",
    "gamma_table",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclasses.dataclass(frozen=True)
class DesignProblem:
    """Inputs to the gain design.

    ``gamma_eps`` defaults to ``1e-3 * sigma``; ``gamma_max`` defaults to the
    value where the eigenvalue scale ``(gamma/sigma)^(1/(k+1))`` reaches 1e4.
    """

    k: int
    L: float
    sigma: float
    gamma_eps: float | None = None
    gamma_max: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "k", check_order(self.k))
        object.__setattr__(self, "L", check_positive(self.L, "L"))
        object.__setattr__(self, "sigma", check_positive(self.sigma, "sigma"))
        if self.gamma_eps is None:
            object.__setattr__(self, "gamma_eps", 1e-3 * self.sigma)
        object.__setattr__(self, "gamma_eps", check_positive(self.gamma_eps, "gamma_eps"))
        if self.gamma_max is None:
            object.__setattr__(self, "gamma_max", self.sigma * 1e4 ** (self.k + 1))
        gmax = check_positive(self.gamma_max, "gamma_max")
        if gmax <= self.gamma_eps:
            raise ValueError(f"gamma_max={gmax} must exceed gamma_eps={self.gamma_eps}")
        object.__setattr__(self, "gamma_max", gmax)


@dataclasses.dataclass(frozen=True)
class DesignResult:
    problem: DesignProblem
    gamma_opt: float
    design: object
    cost_opt: float
    constraint_active: bool
    trace: tuple

    @property
    def q(self):
        return self.design.q


def family_cost(U, gamma, L, sigma):
    return cost(gain_from_gamma(U, gamma, sigma).q, L, sigma)


def golden_section(f, lo, hi, xtol, max_iter=200):
    """Minimize a unimodal ``f`` on ``[lo, hi]``.

    Returns ``(lo, hi)`` of the final bracket; every evaluation goes through
    ``f`` so callers can record them.
    """
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
    return lo, hi


def minimize_gamma(problem):
    """Minimize ``C(q(gamma))`` over ``gamma_eps <= gamma <= gamma_max``.

    A 64-point log-spaced grid locates the best cell, then golden-section
    search in ``log gamma`` shrinks the bracket to a relative width of
    ``bracket_rtol``.  The grid guards against secondary local minima, since
    the cost is not known to be unimodal for ``k >= 1``.

    Raises
    ------
    BracketError
        If the grid minimum sits at ``gamma_max`` (cost still decreasing).
    """
    tol = get_tolerances()
    U = solve_normalized_riccati(problem.k).U
    trace = []

    def f(log_gamma):
        g = math.exp(log_gamma)
        c = family_cost(U, g, problem.L, problem.sigma)
        trace.append((g, c))
        return c

    lo, hi = math.log(problem.gamma_eps), math.log(problem.gamma_max)
    grid = np.linspace(lo, hi, tol.grid_points)
    values = np.array([f(x) for x in grid])
    if not np.all(np.isfinite(values)):
        raise NumericalError("cost is not finite on the search grid")
    i = int(np.argmin(values))
    if i == grid.size - 1:
        raise BracketError(
            f"cost still decreasing at gamma_max={problem.gamma_max:.6g}; raise gamma_max"
        )
    left = grid[max(i - 1, 0)]
    right = grid[i + 1]
    golden_section(f, left, right, tol.bracket_rtol, tol.golden_max_iter)

    g_best, c_best = min(trace, key=lambda gc: gc[1])
    constraint_active = False
    if i == 0 and values[0] <= c_best:
        g_best, c_best, constraint_active = problem.gamma_eps, float(values[0]), True
    design = gain_from_gamma(U, g_best, problem.sigma)
    if not certify(design).passed:
        raise NumericalError(f"optimal design at gamma={g_best:.6g} failed certification")
    return DesignResult(
        problem=problem,
        gamma_opt=float(g_best),
        design=design,
        cost_opt=float(c_best),
        constraint_active=constraint_active,
        trace=tuple(trace),
    )


@dataclasses.dataclass(frozen=True)
class GammaTable:
    k: int
    sigma: float
    L: np.ndarray
    gamma_opt: np.ndarray
    cost_opt: np.ndarray
    slope: float | None
    intercept: float | None
    max_residual: float | None

    @property
    def log_pairs(self):
        return list(zip(np.log(self.L), np.log(self.gamma_opt)))

    def interpolate(self, L):
        """Log-linear interpolation of ``gamma_opt`` at intermediate ``L``."""
        if self.L.size == 1:
            raise ValueError("a one-point table cannot be interpolated")
        return float(np.exp(np.interp(np.log(L), np.log(self.L), np.log(self.gamma_opt))))


def gamma_table(k, sigma, L_grid, gamma_eps=None, gamma_max=None):
    """Optimal ``gamma`` for each ``L`` plus a least-squares log-log fit.

    For a one-point grid ``slope``, ``intercept`` and ``max_residual`` are None.
    """
    k = check_order(k)
    L_grid = np.asarray(L_grid, dtype=float).ravel()
    if L_grid.size == 0:
        raise ValueError("L grid is empty")
    if np.any(L_grid <= 0) or np.any(np.diff(L_grid) <= 0):
        raise ValueError("L grid must be positive and strictly ascending")
    results = [
        minimize_gamma(DesignProblem(k, L, sigma, gamma_eps=gamma_eps, gamma_max=gamma_max))
        for L in L_grid
    ]
    gammas = np.array([r.gamma_opt for r in results])
    costs = np.array([r.cost_opt for r in results])
    slope = intercept = max_residual = None
    if L_grid.size >= 2:
        x, y = np.log(L_grid), np.log(gammas)
        slope, intercept = (float(v) for v in np.polyfit(x, y, 1))
        max_residual = float(np.abs(y - (slope * x + intercept)).max())
    return GammaTable(
        k=k,
        sigma=float(sigma),
        L=L_grid,
        gamma_opt=gammas,
        cost_opt=costs,
        slope=slope,
        intercept=intercept,
        max_residual=max_residual,
    )
