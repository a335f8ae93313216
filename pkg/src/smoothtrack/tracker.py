"""The on-line tracking recursion and its off-line forward/backward variants.

On the grid ``t_i = i/n`` the estimate ``F_hat = (f_hat, f_hat', ...)`` is
updated as::

    F_hat(t_i) = F_hat(t_{i-1}) + a F_hat(t_{i-1}) / n + q_n (X_i - f_hat(t_{i-1}))

with ``q_n[j] = q_j n^{-(2 beta - j)/(2 beta + 1)}`` and ``beta = k + 1``.
Observation ``X_0`` is never consumed by the forward pass.

The backward pass runs the same recursion on the reversed sequence.  Under
``t -> T - t`` the j-th derivative changes sign by ``(-1)^j``, so the result
is mapped back with that sign pattern.  Boundary conditions for both passes
are given in original time coordinates and default to zero.
"""

import dataclasses
import warnings

import numpy as np

from .design import build_structure, closed_loop
from .linalg import eigenvalues
from .validation import check_gain, check_init, check_observations

__all__ = [
    "TrackerConfig",
    "TrackerState",
    "build_scaled_gains",
    "transition_matrix",
    "normalized_transition",
    "step_forward",
    "stream_forward",
    "run_forward",
    "run_backward",
    "run_combined",
    "run",
    "MODES",
]

MODES = ("forward", "backward", "combined")


def build_scaled_gains(q, n, beta):
    """Gains per step: ``q_j * n**(-(2 beta - j) / (2 beta + 1))``."""
    q = np.asarray(q, dtype=float)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    j = np.arange(q.size)
    return q * float(n) ** (-(2 * beta - j) / (2 * beta + 1))


def _sign_pattern(k):
    return (-1.0) ** np.arange(k + 1)


@dataclasses.dataclass(frozen=True)
class TrackerConfig:
    """Static description of one tracking run on ``n + 1`` points.

    ``init`` is the boundary value at ``t = 0`` for the forward pass and
    ``backward_init`` the one at ``t = T`` for the backward pass.
    """

    k: int
    n: int
    q: np.ndarray
    init: np.ndarray | None = None
    backward_init: np.ndarray | None = None

    def __post_init__(self):
        q = check_gain(self.q, self.k)
        if int(self.n) != self.n or self.n < self.k + 2:
            raise ValueError(f"n must be an integer >= k + 2 = {self.k + 2}, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "init", check_init(self.init, self.k))
        object.__setattr__(self, "backward_init", check_init(self.backward_init, self.k))

    @property
    def beta(self):
        return self.k + 1

    @property
    def scaled_gains(self):
        return build_scaled_gains(self.q, self.n, self.beta)

    @property
    def spectral_radius(self):
        return float(np.abs(eigenvalues(transition_matrix(self))).max())

    @property
    def stable(self):
        return self.spectral_radius < 1.0


@dataclasses.dataclass(frozen=True)
class TrackerState:
    index: int
    estimate: np.ndarray


def transition_matrix(cfg):
    """One-step map ``I + a/n - q_n A`` acting on the estimate."""
    s = build_structure(cfg.k)
    return np.eye(cfg.k + 1) + s.a / cfg.n - np.outer(cfg.scaled_gains, s.A[0])


def normalized_transition(cfg):
    """``I + n^{-2beta/(2beta+1)} (a - qA)``, similar to :func:`transition_matrix`."""
    h = cfg.n ** (-2 * cfg.beta / (2 * cfg.beta + 1))
    return np.eye(cfg.k + 1) + h * closed_loop(cfg.q)


def step_forward(state, x, cfg):
    if state.index >= cfg.n:
        raise ValueError(f"state index {state.index} already at n={cfg.n}")
    est = state.estimate
    new = est + cfg.scaled_gains * (x - est[0])
    new[:-1] += est[1:] * (1.0 / cfg.n)
    return TrackerState(index=state.index + 1, estimate=new)


def stream_forward(observations, cfg):
    """Yield states one observation at a time; the first item of
    ``observations`` is ``X_0`` and is skipped, as in :func:`run_forward`."""
    state = TrackerState(0, cfg.init.copy())
    yield state
    it = iter(observations)
    next(it, None)
    for x in it:
        state = step_forward(state, float(x), cfg)
        yield state


def _check_stable(cfg):
    if not cfg.stable:
        warnings.warn(
            f"one-step transition has spectral radius {cfg.spectral_radius:.4f} >= 1 "
            f"for n={cfg.n}; the recursion will diverge",
            RuntimeWarning,
            stacklevel=3,
        )


def _propagate(X, cfg, init):
    # X: (reps, n+1) -> (reps, n+1, k+1)
    reps, m = X.shape
    k = cfg.k
    qn = cfg.scaled_gains
    out = np.empty((reps, m, k + 1))
    est = np.broadcast_to(init, (reps, k + 1)).copy()
    out[:, 0] = est
    inv_n = 1.0 / cfg.n
    for i in range(1, m):
        innov = X[:, i] - est[:, 0]
        new = est + innov[:, None] * qn
        new[:, :-1] += est[:, 1:] * inv_n
        est = new
        out[:, i] = est
    return out


def _prepare(observations, cfg):
    X = np.asarray(observations, dtype=float)
    batched = X.ndim == 2 and X.shape[1] != 1
    if batched:
        if not np.all(np.isfinite(X)):
            raise ValueError("observations contain NaN or infinity")
    else:
        X = check_observations(X)[None, :]
    if X.shape[1] != cfg.n + 1:
        raise ValueError(f"expected {cfg.n + 1} observations, got {X.shape[1]}")
    return X, batched


def run_forward(observations, cfg):
    """Forward trajectory, shape ``(n+1, k+1)``.

    ``observations`` may also be a ``(reps, n+1)`` batch, giving
    ``(reps, n+1, k+1)``.  Row ``i`` depends only on ``X_1 .. X_i``.
    """
    X, batched = _prepare(observations, cfg)
    _check_stable(cfg)
    out = _propagate(X, cfg, cfg.init)
    return out if batched else out[0]


def run_backward(observations, cfg):
    """Backward-time trajectory mapped to original time, shape ``(n+1, k+1)``.

    Row ``i`` depends only on ``X_i .. X_{n-1}``; ``X_n`` is skipped just as
    the forward pass skips ``X_0``.
    """
    X, batched = _prepare(observations, cfg)
    _check_stable(cfg)
    sign = _sign_pattern(cfg.k)
    out = _propagate(X[:, ::-1], cfg, cfg.backward_init * sign)
    out = out[:, ::-1] * sign
    return out if batched else out[0]


def run_combined(observations, cfg):
    """Backward rows for ``i < n//2``, forward rows from ``n//2`` on."""
    fwd = run_forward(observations, cfg)
    bwd = run_backward(observations, cfg)
    split = cfg.n // 2
    out = fwd.copy()
    out[..., :split, :] = bwd[..., :split, :]
    return out


_RUNNERS = {"forward": run_forward, "backward": run_backward, "combined": run_combined}


def run(observations, cfg, mode="forward"):
    try:
        runner = _RUNNERS[mode]
    except KeyError:
        raise ValueError(f"unknown tracker mode {mode!r}; choose from {MODES}") from None
    return runner(observations, cfg)
