"""scikit-learn compatible front end."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .design import gain_from_gamma, solve_normalized_riccati
from .optimize import DesignProblem, minimize_gamma
from .risk import risk_decomposition
from .tracker import MODES, TrackerConfig, run
from .validation import check_init, check_observations, check_order, check_positive


class SmoothTracker(TransformerMixin, BaseEstimator):
    """Track a smooth function and its first ``k`` derivatives from noisy samples.

    ``fit`` designs the constant filter gain: for a fixed ``gamma`` it takes
    the stationary Kalman gain directly, otherwise it minimizes the limiting
    cost over ``gamma >= gamma_eps``.  The gain does not depend on the
    sample size, so a fitted tracker can ``transform`` series of any length.

    Observations are the values ``X_0, ..., X_n`` at ``t_i = i/n`` on
    ``[0, 1]``, passed as a vector or a single column.

    Parameters
    ----------
    k : int
        Number of derivatives tracked; ``f^(k)`` is assumed Lipschitz.
    L : float
        Lipschitz constant of ``f^(k)``.
    sigma : float
        Observation noise standard deviation.
    gamma : float, optional
        Fix the design parameter instead of optimizing it.
    gamma_eps, gamma_max : float, optional
        Search range for the optimizer.
    mode : {"forward", "backward", "combined"}
        ``forward`` is on-line; the others use the whole series.
    init, backward_init : array-like, optional
        Boundary values at ``t = 0`` and ``t = 1``; zero by default.

    Attributes
    ----------
    gamma_ : float
    q_ : ndarray of shape (k + 1,)
    design_ : GainDesign
    result_ : DesignResult or None
        Optimizer output, None when ``gamma`` was fixed.
    risk_ : RiskDecomposition
    n_features_in_ : int
    """

    def __init__(self, k=2, L=1.0, sigma=1.0, gamma=None, gamma_eps=None, gamma_max=None,
                 mode="forward", init=None, backward_init=None):
        self.k = k
        self.L = L
        self.sigma = sigma
        self.gamma = gamma
        self.gamma_eps = gamma_eps
        self.gamma_max = gamma_max
        self.mode = mode
        self.init = init
        self.backward_init = backward_init

    def fit(self, X=None, y=None):
        k = check_order(self.k)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        check_init(self.init, k)
        check_init(self.backward_init, k)
        if X is not None:
            check_observations(X, n_min=k + 3)
        if self.gamma is None:
            self.result_ = minimize_gamma(
                DesignProblem(k, self.L, self.sigma, self.gamma_eps, self.gamma_max)
            )
            self.design_ = self.result_.design
        else:
            check_positive(self.gamma, "gamma")
            self.result_ = None
            self.design_ = gain_from_gamma(solve_normalized_riccati(k), self.gamma, self.sigma)
        self.gamma_ = self.design_.gamma
        self.q_ = self.design_.q.copy()
        self.risk_ = risk_decomposition(self.q_, self.L, self.sigma)
        self.n_features_in_ = 1
        return self

    def _config(self, X):
        X = check_observations(X, n_min=self.k + 3)
        cfg = TrackerConfig(self.k, X.size - 1, self.q_, init=self.init,
                            backward_init=self.backward_init)
        return X, cfg

    def transform(self, X):
        """Estimates of ``(f, f', ..., f^(k))``, shape ``(len(X), k + 1)``."""
        check_is_fitted(self, "q_")
        X, cfg = self._config(X)
        return run(X, cfg, self.mode)

    def predict(self, X):
        """Estimates of ``f`` alone."""
        return self.transform(X)[:, 0]

    def score(self, X, y):
        """Negative mean squared error of ``predict(X)`` against true values ``y``."""
        y = np.asarray(y, dtype=float).ravel()
        return -float(np.mean((self.predict(X) - y) ** 2))

    def get_feature_names_out(self, input_features=None):
        return np.array([f"f{j}" for j in range(self.k + 1)], dtype=object)
