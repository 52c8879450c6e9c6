"""scikit-learn style wrapper around the delayed-information hedging solution."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .hedging import evaluate_linear_strategy, solve
from .models import MarketModel


class DelayHedger(BaseEstimator):
    """Optimal exponential-utility hedger for Gaussian increments seen with a delay.

    Parameters
    ----------
    delay : int, default=0
        Number of periods by which price information lags.
    alpha : float, default=1.0
        Absolute risk aversion of ``u(x) = -exp(-alpha x)``.
    method : {"auto", "schur", "minors", "closed"}, default="auto"
        Decomposition route, see :func:`delayhedge.decomposition.decompose`.

    Attributes
    ----------
    model_ : MarketModel
    decomposition_ : BandDecomposition
    strategy_ : LinearStrategy
        Positions for unit risk aversion; :meth:`predict` divides by ``alpha``.
    report_ : ValueReport
    value_ : float
        Optimal expected utility, the same for every ``alpha``.
    n_features_in_ : int
        Number of trading periods.

    Notes
    -----
    ``fit`` takes the increment distribution, not samples: either a
    :class:`MarketModel` or a covariance matrix plus optional ``mean``.
    ``predict`` and ``score`` take realised increment paths, one per row.
    """

    def __init__(self, delay=0, alpha=1.0, method="auto"):
        self.delay = delay
        self.alpha = alpha
        self.method = method

    def fit(self, X, y=None, mean=None):
        if isinstance(X, MarketModel):
            model = X if mean is None else MarketModel(mean, X.sigma, X.s0, X.name)
        else:
            sigma = check_array(X, ensure_2d=True)
            model = MarketModel(np.zeros(sigma.shape[0]) if mean is None else mean, sigma)
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        self.model_ = model
        self.decomposition_, self.strategy_, self.report_ = solve(model, self.delay, method=self.method)
        self.value_ = self.report_.value
        self.n_features_in_ = model.n
        return self

    def _paths(self, X):
        check_is_fitted(self, "strategy_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return X

    def predict(self, X):
        """Positions held over each period, shape ``(paths, n)``."""
        X = self._paths(X)
        return self.strategy_.positions(X) / self.alpha

    def transform(self, X):
        return self.predict(X)

    def terminal_wealth(self, X):
        X = self._paths(X)
        return np.einsum("pi,pi->p", self.predict(X), X)

    def score(self, X, y=None):
        """Sample mean of the realised utility ``-exp(-alpha V)`` (higher is better)."""
        return float(np.mean(-np.exp(-self.alpha * self.terminal_wealth(X))))

    def expected_utility(self):
        """Exact expected utility of the fitted strategy at risk aversion ``alpha``."""
        check_is_fitted(self, "strategy_")
        return evaluate_linear_strategy(self.model_, self.strategy_.scaled(1.0 / self.alpha), alpha=self.alpha)
