"""Test signals, noisy observations and Monte Carlo risk estimates.

Signals live on ``[0, 1]`` and are sampled on ``t_i = i/n``.  Each sample
row holds ``f`` and its first ``k`` derivatives.  Replications draw from
child seeds spawned from one ``SeedSequence``, so a fixed configuration
always reproduces bit-identical numbers.
"""

import dataclasses
import math

import numpy as np

from .design import build_structure
from .exceptions import ClassViolationError
from .tracker import MODES, TrackerConfig, run, transition_matrix
from .validation import check_order, check_positive

__all__ = [
    "SIGNAL_KINDS",
    "NOISE_KINDS",
    "SignalSpec",
    "SimConfig",
    "RiskReport",
    "ExactMoments",
    "RateEstimate",
    "ProfileReport",
    "generate_signal",
    "simulate_observations",
    "draw_noise",
    "exact_moments",
    "monte_carlo_risk",
    "estimate_rate",
    "boundary_profile",
    "risk_exponents",
]

SIGNAL_KINDS = ("sinusoid", "polynomial-drift", "worst-case-drift", "kalman-random")
NOISE_KINDS = ("gaussian", "uniform", "rademacher")

_LIPSCHITZ_RTOL = 1e-9
_CHECK_GRID = 4096


@dataclasses.dataclass(frozen=True)
class SignalSpec:
    """A member of the smoothness class with Lipschitz ``f^(k)``.

    Parameters by kind:

    ``sinusoid``
        ``amplitude`` (default ``L / omega**(k+1)``), ``omega`` (``2 pi``),
        ``phase`` (``pi/4``); ``f = amplitude * sin(omega t + phase)``.
    ``polynomial-drift``
        ``slope`` (default ``L``) and initial values ``c0 .. ck`` of
        ``f, f', ..., f^(k)`` at ``t = 0`` (default 0); ``f^(k)`` is linear.
    ``worst-case-drift``
        polynomial drift with slope exactly ``L``.
    ``kalman-random``
        ``gamma`` and ``seed``; ``f^(k)`` is a random walk with step
        ``n^{-(beta+1)/(2 beta+1)} gamma eta_i`` and the lower derivatives
        are integrated exactly as the tracker model assumes.  The Lipschitz
        check is skipped for this kind.
    """

    kind: str
    k: int
    L: float
    params: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}; choose from {SIGNAL_KINDS}")
        object.__setattr__(self, "k", check_order(self.k))
        object.__setattr__(self, "L", check_positive(self.L, "L", allow_zero=True))
        object.__setattr__(self, "params", dict(self.params))
        if self.kind == "sinusoid":
            bound = abs(self._amplitude()) * self._omega() ** (self.k + 1)
            if bound > self.L * (1 + _LIPSCHITZ_RTOL):
                raise ClassViolationError(
                    f"sinusoid has Lipschitz constant {bound:.6g} for f^({self.k}), "
                    f"above L={self.L:.6g}"
                )
        if self.kind == "polynomial-drift" and abs(self._slope()) > self.L * (1 + _LIPSCHITZ_RTOL):
            raise ClassViolationError(f"slope {self._slope()} exceeds L={self.L}")
        if self.kind != "kalman-random":
            t = np.linspace(0.0, 1.0, _CHECK_GRID + 1)
            top = self.evaluate(t)[:, self.k]
            worst = np.abs(np.diff(top)).max() * _CHECK_GRID
            if worst > self.L * (1 + _LIPSCHITZ_RTOL) + 1e-12:
                raise ClassViolationError(
                    f"f^({self.k}) has difference quotient {worst:.6g} above L={self.L:.6g}"
                )

    def _omega(self):
        return float(self.params.get("omega", 2 * math.pi))

    def _amplitude(self):
        return float(self.params.get("amplitude", self.L / self._omega() ** (self.k + 1)))

    def _slope(self):
        if self.kind == "worst-case-drift":
            return self.L
        return float(self.params.get("slope", self.L))

    def initial_values(self):
        return np.array([float(self.params.get(f"c{j}", 0.0)) for j in range(self.k + 1)])

    def evaluate(self, t):
        """Exact ``(f, f', ..., f^(k))`` at times ``t``; shape ``(len(t), k+1)``."""
        t = np.asarray(t, dtype=float)
        k = self.k
        out = np.empty((t.size, k + 1))
        if self.kind == "sinusoid":
            c, w = self._amplitude(), self._omega()
            phase = float(self.params.get("phase", math.pi / 4))
            for j in range(k + 1):
                out[:, j] = c * w**j * np.sin(w * t + phase + j * math.pi / 2)
        elif self.kind in ("polynomial-drift", "worst-case-drift"):
            c = self.initial_values()
            slope = self._slope()
            for j in range(k + 1):
                col = slope * t ** (k + 1 - j) / math.factorial(k + 1 - j)
                for m in range(j, k + 1):
                    col = col + c[m] * t ** (m - j) / math.factorial(m - j)
                out[:, j] = col
        else:
            raise ValueError("kalman-random signals depend on n; use generate_signal")
        return out


def generate_signal(spec, n):
    """Samples of ``(f, ..., f^(k))`` on ``t_i = i/n``, shape ``(n+1, k+1)``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    k = spec.k
    if spec.kind == "kalman-random":
        return _kalman_random(spec, n)
    F = spec.evaluate(np.arange(n + 1) / n)
    steps = np.abs(np.diff(F[:, k]))
    if steps.size and steps.max() > spec.L / n * (1 + _LIPSCHITZ_RTOL) + 1e-15:
        raise ClassViolationError(f"sampled f^({k}) increments exceed L/n")
    return F


def _kalman_random(spec, n):
    k = spec.k
    beta = k + 1
    gamma = float(spec.params.get("gamma", 1.0))
    rng = np.random.default_rng(int(spec.params.get("seed", 0)))
    eta = rng.standard_normal(n)
    step = n ** (-(beta + 1) / (2 * beta + 1)) * gamma
    a = build_structure(k).a
    F = np.empty((n + 1, k + 1))
    F[0] = spec.initial_values()
    for i in range(1, n + 1):
        F[i] = F[i - 1] + a @ F[i - 1] / n
        F[i, k] += step * eta[i - 1]
    return F


def draw_noise(rng, size, kind="gaussian"):
    """I.i.d. noise with mean 0 and variance 1."""
    if kind == "gaussian":
        return rng.standard_normal(size)
    if kind == "uniform":
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size)
    if kind == "rademacher":
        return rng.choice(np.array([-1.0, 1.0]), size=size)
    raise ValueError(f"unknown noise kind {kind!r}; choose from {NOISE_KINDS}")


def _seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def simulate_observations(samples, sigma, noise_kind="gaussian", seed=0, reps=None):
    """``X_i = f(t_i) + sigma xi_i``.

    ``samples`` is either the ``(n+1, k+1)`` output of :func:`generate_signal`
    or a vector of ``f`` values.  With ``reps`` set, returns a
    ``(reps, n+1)`` array whose rows use independent spawned seeds.
    """
    samples = np.asarray(samples, dtype=float)
    f = samples[:, 0] if samples.ndim == 2 else samples
    sigma = check_positive(sigma, "sigma", allow_zero=True)
    ss = _seed_sequence(seed)
    if reps is None:
        return f + sigma * draw_noise(np.random.default_rng(ss), f.size, noise_kind)
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    X = np.empty((reps, f.size))
    for r, child in enumerate(ss.spawn(reps)):
        X[r] = f + sigma * draw_noise(np.random.default_rng(child), f.size, noise_kind)
    return X


@dataclasses.dataclass(frozen=True)
class SimConfig:
    signal: SignalSpec
    sigma: float
    n: int
    noise_kind: str = "gaussian"
    seed: int = 0
    reps: int = 100

    def __post_init__(self):
        check_positive(self.sigma, "sigma", allow_zero=True)
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise_kind!r}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.n < self.signal.k + 2:
            raise ValueError(f"n must be >= k + 2, got {self.n}")

    @property
    def k(self):
        return self.signal.k

    def tracker(self, q, init=None, backward_init=None):
        return TrackerConfig(self.k, self.n, q, init=init, backward_init=backward_init)


def risk_exponents(k, n):
    """Per-derivative normalization ``n^{2(beta - j)/(2 beta + 1)}``."""
    beta = k + 1
    j = np.arange(k + 1)
    return float(n) ** (2 * (beta - j) / (2 * beta + 1))


@dataclasses.dataclass(frozen=True)
class RiskReport:
    n: int
    reps: int
    mode: str
    times: np.ndarray
    per_j_mse: np.ndarray
    per_j_se: np.ndarray
    normalized_risk: np.ndarray
    normalized_se: np.ndarray
    mse_profile: np.ndarray
    mse_profile_se: np.ndarray
    boundary_profile: np.ndarray
    rate_slopes: dict | None = None


def _eval_indices(eval_points, n):
    t = np.asarray(eval_points, dtype=float).ravel()
    if np.any(t <= 0) or np.any(t > 1):
        raise ValueError("evaluation points must lie in (0, 1]")
    return np.rint(t * n).astype(int)


def monte_carlo_risk(cfg, q, mode="forward", eval_points=(0.3, 0.5, 0.7), init=None,
                     backward_init=None):
    """Empirical squared error per derivative, averaged over replications.

    Points default to ``t in {0.3, 0.5, 0.7}``, away from the boundary layer.
    Standard errors are the sample std of the squared errors over
    ``sqrt(reps)``.
    """
    F = generate_signal(cfg.signal, cfg.n)
    tcfg = cfg.tracker(q, init=init, backward_init=backward_init)
    X = simulate_observations(F, cfg.sigma, cfg.noise_kind, cfg.seed, reps=cfg.reps)
    err = run(X, tcfg, mode) - F[None]
    sq = err**2
    mse = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / math.sqrt(cfg.reps) if cfg.reps > 1 else np.full_like(mse, np.nan)
    idx = _eval_indices(eval_points, cfg.n)
    scale = risk_exponents(cfg.k, cfg.n)
    return RiskReport(
        n=cfg.n,
        reps=cfg.reps,
        mode=mode,
        times=idx / cfg.n,
        per_j_mse=mse[idx],
        per_j_se=se[idx],
        normalized_risk=mse[idx] * scale,
        normalized_se=se[idx] * scale,
        mse_profile=mse,
        mse_profile_se=se,
        boundary_profile=np.abs(err).mean(axis=0),
    )


@dataclasses.dataclass(frozen=True)
class ExactMoments:
    bias: np.ndarray
    covariance: np.ndarray

    @property
    def mse(self):
        return self.bias**2 + np.diagonal(self.covariance, axis1=1, axis2=2)


def _forward_moments(f, tcfg, init, sigma):
    T = transition_matrix(tcfg)
    qn = tcfg.scaled_gains
    m = np.empty((f.size, tcfg.k + 1))
    S = np.empty((f.size, tcfg.k + 1, tcfg.k + 1))
    m[0] = init
    S[0] = 0.0
    W = sigma**2 * np.outer(qn, qn)
    for i in range(1, f.size):
        m[i] = T @ m[i - 1] + qn * f[i]
        S[i] = T @ S[i - 1] @ T.T + W
    return m, S


def exact_moments(cfg, q, mode="forward", init=None, backward_init=None):
    """Exact mean error and covariance of the estimate at every ``t_i``.

    The tracker is affine in the observations, so its mean follows the
    noiseless recursion and its covariance obeys
    ``S_i = T S_{i-1} T^T + sigma^2 q_n q_n^T`` with the one-step matrix
    ``T``.  Only the noise variance matters, not its distribution.
    """
    F = generate_signal(cfg.signal, cfg.n)
    tcfg = cfg.tracker(q, init=init, backward_init=backward_init)
    k = cfg.k
    m_f, S_f = _forward_moments(F[:, 0], tcfg, tcfg.init, cfg.sigma)
    if mode == "forward":
        mean, cov = m_f, S_f
    else:
        sign = (-1.0) ** np.arange(k + 1)
        m_b, S_b = _forward_moments(F[::-1, 0], tcfg, tcfg.backward_init * sign, cfg.sigma)
        m_b = m_b[::-1] * sign
        S_b = S_b[::-1] * np.outer(sign, sign)
        if mode == "backward":
            mean, cov = m_b, S_b
        elif mode == "combined":
            split = cfg.n // 2
            mean = np.concatenate([m_b[:split], m_f[split:]])
            cov = np.concatenate([S_b[:split], S_f[split:]])
        else:
            raise ValueError(f"unknown tracker mode {mode!r}; choose from {MODES}")
    return ExactMoments(bias=mean - F, covariance=cov)


@dataclasses.dataclass(frozen=True)
class RateEstimate:
    n_list: np.ndarray
    mse: np.ndarray
    se: np.ndarray
    slope: float
    intercept: float
    expected: float
    j: int
    t: float


def estimate_rate(base, q, n_list, j=0, t=0.5, mode="forward", init=None):
    """Least-squares slope of ``log MSE_j(t)`` against ``log n``.

    ``base`` supplies everything except ``n``.  Each ``n`` gets its own child
    seed of ``base.seed``.  The reference value is ``-2(beta - j)/(2 beta + 1)``.
    """
    n_list = np.asarray(n_list, dtype=int)
    if n_list.size < 3 or np.any(np.diff(n_list) <= 0):
        raise ValueError("n_list must be strictly ascending with at least 3 entries")
    k = base.k
    if not 0 <= j <= k:
        raise ValueError(f"derivative index j must lie in [0, {k}]")
    children = np.random.SeedSequence(base.seed).spawn(n_list.size)
    mse, se = [], []
    for n, child in zip(n_list, children):
        cfg = dataclasses.replace(base, n=int(n), seed=child)
        report = monte_carlo_risk(cfg, q, mode=mode, eval_points=(t,), init=init)
        mse.append(report.per_j_mse[0, j])
        se.append(report.per_j_se[0, j])
    mse, se = np.array(mse), np.array(se)
    slope, intercept = np.polyfit(np.log(n_list), np.log(mse), 1)
    beta = k + 1
    return RateEstimate(
        n_list=n_list,
        mse=mse,
        se=se,
        slope=float(slope),
        intercept=float(intercept),
        expected=-2 * (beta - j) / (2 * beta + 1),
        j=j,
        t=float(t),
    )


@dataclasses.dataclass(frozen=True)
class ProfileReport:
    times: np.ndarray
    mean_abs_error: dict
    std_error: dict

    def window(self, mode, lo, hi, j=0):
        """Mean absolute error of derivative ``j`` averaged over ``lo <= t <= hi``."""
        mask = (self.times >= lo) & (self.times <= hi)
        return float(self.mean_abs_error[mode][mask, j].mean())


def boundary_profile(cfg, q, modes=MODES, init=None, backward_init=None):
    """Mean absolute error at every ``t_i`` for each tracker mode.

    All modes see the same noisy observations.
    """
    F = generate_signal(cfg.signal, cfg.n)
    tcfg = cfg.tracker(q, init=init, backward_init=backward_init)
    X = simulate_observations(F, cfg.sigma, cfg.noise_kind, cfg.seed, reps=cfg.reps)
    mae, sem = {}, {}
    for mode in modes:
        err = np.abs(run(X, tcfg, mode) - F[None])
        mae[mode] = err.mean(axis=0)
        sem[mode] = (err.std(axis=0, ddof=1) / math.sqrt(cfg.reps)
                     if cfg.reps > 1 else np.full_like(mae[mode], np.nan))
    return ProfileReport(times=np.arange(cfg.n + 1) / cfg.n, mean_abs_error=mae, std_error=sem)
