"""Optimal strategies and values for exponential utility with delayed information.

Risk aversion is normalised to one.  For ``u(x) = -exp(-alpha x)`` the optimal
position is the unit-risk-aversion position divided by ``alpha``, and the
attained utility level is unchanged, because ``V`` is linear in the strategy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import BandDecomposition, decompose
from .errors import DimensionMismatch, InvalidParameter, NotPositiveDefinite, UtilityDiverges
from .linalg import cholesky_logdet
from .models import MarketModel


@dataclass(frozen=True, eq=False)
class LinearStrategy:
    """Position ``gamma_i = intercept[i] + sum_j loading[i, j] * X_j``.

    ``loading[i, j]`` must vanish unless ``i - j > delay`` (0-based or
    1-based alike), so the position held over period ``i`` only uses
    increments the trader has already observed.
    """

    delay: int
    intercept: np.ndarray
    loading: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.intercept, dtype=float)
        L = np.asarray(self.loading, dtype=float)
        n = a.shape[0]
        if a.ndim != 1 or L.shape != (n, n):
            raise DimensionMismatch(f"intercept {a.shape} and loading {L.shape} do not match")
        if self.delay < 0:
            raise InvalidParameter("delay must be nonnegative")
        if np.any(L[admissible_mask(n, self.delay) == 0] != 0):
            raise InvalidParameter(f"loading uses information unavailable with delay {self.delay}")
        object.__setattr__(self, "intercept", a)
        object.__setattr__(self, "loading", L)

    @property
    def n(self) -> int:
        return self.intercept.shape[0]

    def positions(self, x) -> np.ndarray:
        """Positions for each row of realised increments ``x`` (paths x n)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n:
            raise DimensionMismatch(f"increments have {x.shape[1]} columns, expected {self.n}")
        return self.intercept + x @ self.loading.T

    def terminal_wealth(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.einsum("pi,pi->p", self.positions(x), x)

    def scaled(self, factor: float) -> "LinearStrategy":
        return LinearStrategy(self.delay, factor * self.intercept, factor * self.loading)


def admissible_mask(n: int, delay: int) -> np.ndarray:
    """1 where ``loading[i, j]`` may be nonzero, i.e. ``i - j > delay``."""
    k = np.arange(n)
    return ((k[:, None] - k[None, :]) > delay).astype(float)


@dataclass(frozen=True)
class ValueReport:
    value: float
    c_constant: float
    logdet_sigma: float
    logdet_q: float
    quad_term: float

    def as_row(self) -> dict:
        return {
            "value": self.value,
            "c_constant": self.c_constant,
            "logdet_sigma": self.logdet_sigma,
            "logdet_q": self.logdet_q,
            "quad_term": self.quad_term,
        }


def _check_pair(model: MarketModel, dec: BandDecomposition):
    if dec.n != model.n:
        raise DimensionMismatch(f"decomposition has size {dec.n}, model has n={model.n}")


def optimal_strategy(model: MarketModel, dec: BandDecomposition) -> LinearStrategy:
    _check_pair(model, dec)
    loading = -np.tril(dec.gamma, -1) + 0.0  # "+ 0.0" turns -0.0 into 0.0
    # gamma is exactly zero on the band, so the loading is admissible as built
    return LinearStrategy(dec.delay, model.theta @ model.mu, loading)


def optimal_value(model: MarketModel, dec: BandDecomposition) -> ValueReport:
    _check_pair(model, dec)
    c = 0.5 * (model.logdet_sigma - dec.q_logdet + model.quad_term)
    return ValueReport(
        value=-math.exp(-c),
        c_constant=c,
        logdet_sigma=model.logdet_sigma,
        logdet_q=dec.q_logdet,
        quad_term=model.quad_term,
    )


def solve(model: MarketModel, delay: int, method: str = "auto"):
    """Decompose ``model.theta`` and return ``(decomposition, strategy, report)``."""
    dec = decompose(model.theta, delay, method=method)
    return dec, optimal_strategy(model, dec), optimal_value(model, dec)


def value_closed_form_kms(rho: float, n: int, delay: int) -> float:
    """Optimal value for zero-mean KMS increments, delay 0 or 1, ``n >= 3``."""
    if not 0.0 < rho < 1.0:
        raise InvalidParameter(f"rho must lie in (0, 1), got {rho}")
    if n < 3:
        raise InvalidParameter("closed forms assume n >= 3")
    r2 = rho * rho
    if delay == 0:
        log_v = 0.5 * (math.log1p(-r2) - (n - 2) * math.log1p(r2))
    elif delay == 1:
        log_v = 0.5 * (math.log1p(-r2) + (n - 2) * math.log1p(r2) - (n - 3) * math.log1p(r2 + r2 * r2))
    else:
        raise InvalidParameter("closed forms exist for delay 0 or 1 only")
    return -math.exp(log_v)


def evaluate_linear_strategy(model: MarketModel, strat: LinearStrategy, alpha: float = 1.0) -> float:
    """Exact ``E[-exp(-alpha V)]`` for a linear strategy under ``X ~ N(mu, sigma)``.

    Writing ``alpha V = a.X + X'BX/2`` with ``B = L + L'``, the Gaussian
    integral is finite iff ``P = theta + B`` is positive definite, and then
    equals ``sqrt(det theta / det P) * exp(w'P^{-1}w / 2 - mu'theta mu / 2)``
    with ``w = theta mu - a``.  Raises :class:`UtilityDiverges` otherwise.
    """
    if strat.n != model.n:
        raise DimensionMismatch(f"strategy has n={strat.n}, model has n={model.n}")
    alpha = _check_alpha(alpha)
    a = alpha * strat.intercept
    L = alpha * strat.loading
    P = model.theta + L + L.T
    try:
        F, logdet_p = cholesky_logdet(P)
    except NotPositiveDefinite:
        raise UtilityDiverges("theta + B is not positive definite; expected utility is -inf") from None
    w = model.theta @ model.mu - a
    z = np.linalg.solve(F, w)
    log_e = 0.5 * (-model.logdet_sigma - logdet_p) + 0.5 * float(z @ z) - 0.5 * model.quad_term
    return -math.exp(log_e)


def _check_alpha(alpha):
    if not alpha > 0:
        raise InvalidParameter(f"alpha must be positive, got {alpha}")
    return float(alpha)
