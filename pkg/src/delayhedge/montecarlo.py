"""Monte Carlo checks of the analytic results.

Increments are drawn with numpy's ``PCG64`` bit generator, normals from its
ziggurat sampler, and mapped through the Cholesky factor of ``sigma``.  The
same ``(model, paths, seed)`` always yields the same batch.  Means are taken
with numpy's pairwise summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import BandDecomposition
from .errors import DimensionMismatch, InvalidParameter
from .hedging import LinearStrategy, optimal_strategy, optimal_value
from .linalg import cholesky_logdet
from .models import MarketModel


@dataclass(frozen=True, eq=False)
class SimBatch:
    seed: int
    paths: int
    x: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[1]


def simulate(model: MarketModel, paths: int, seed: int) -> SimBatch:
    """Draw ``paths`` i.i.d. increment vectors ``mu + F z``."""
    if int(paths) != paths or paths < 1:
        raise InvalidParameter(f"paths must be a positive integer, got {paths}")
    F, _ = cholesky_logdet(model.sigma)
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal((int(paths), model.n))
    x = z @ F.T
    x += model.mu
    x.setflags(write=False)
    return SimBatch(int(seed), int(paths), x)


def _mean_and_se(values):
    n = values.shape[0]
    mean = float(np.sum(values) / n)
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def mc_expected_utility(batch: SimBatch, strat: LinearStrategy) -> tuple[float, float]:
    """Sample mean of ``-exp(-V)`` and its standard error."""
    if strat.n != batch.n:
        raise DimensionMismatch(f"strategy has n={strat.n}, batch has n={batch.n}")
    return _mean_and_se(-np.exp(-strat.terminal_wealth(batch.x)))


def qhat_weights(batch: SimBatch, model: MarketModel, dec: BandDecomposition) -> np.ndarray:
    """Per-path density ``exp(C - V)`` of the measure under which ``X ~ N(0, Q)``."""
    if batch.n != model.n or dec.n != model.n:
        raise DimensionMismatch("batch, model and decomposition sizes differ")
    wealth = optimal_strategy(model, dec).terminal_wealth(batch.x)
    return np.exp(optimal_value(model, dec).c_constant - wealth)


def weighted_moments(x, weights):
    """Weighted mean and covariance of the rows of ``x``."""
    x = np.asarray(x, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (x.shape[0],):
        raise DimensionMismatch(f"{weights.shape[0]} weights for {x.shape[0]} paths")
    p = weights / np.sum(weights)
    mean = p @ x
    xc = x - mean
    return mean, xc.T @ (xc * p[:, None])


def delayed_martingale_check(batch: SimBatch, weights, delay: int) -> float:
    """Largest weighted correlation between ``X_k`` and ``X_j`` with ``k - j > delay``.

    Zero in the population when the weights come from :func:`qhat_weights`
    for the same ``delay``.  Returns 0 when no such pair exists.
    """
    _, cov = weighted_moments(batch.x, weights)
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    k = np.arange(batch.n)
    far = (k[:, None] - k[None, :]) > delay
    return float(np.abs(corr[far]).max()) if far.any() else 0.0
