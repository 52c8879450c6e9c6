"""Banded / anti-banded splitting of a precision matrix.

For a positive definite ``theta`` and a delay ``D`` there is exactly one way
to write ``theta = R + gamma`` where ``inv(R)`` vanishes outside the band
``|i - j| <= D`` and ``gamma`` vanishes on it.  ``R`` agrees with ``theta``
on the band; each entry outside it is fixed by requiring that a
``(D+1) x (D+1)`` minor of ``R`` vanish.  Entries are filled diagonal by
diagonal, moving away from the main diagonal, because every equation only
involves entries closer to the diagonal than the unknown.

Three routes are provided:

``"minors"``
    Literal Laplace-expansion formula built from :func:`~delayhedge.linalg.minor`.
    ``O(n^2 D^4)``; intended for verification on small inputs.
``"schur"``
    The same equation solved as ``R[i, i+m] = w_i . R[i+1:i+D, i+m]`` with
    ``w_i = solve(R[C, C], R[C, i])``, ``C = i+1..i+D``.  The weights do not
    depend on ``m``, so each band block is factored once.  ``O(n^2 D)``.
``"closed"``
    Explicit formulas, available for ``D = 0`` and ``D = 1`` only.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, NotPositiveDefinite, ResultNotPD, SingularPrincipalMinor
from .linalg import (
    PD_TOLERANCE,
    band_mask,
    check_positive_definite,
    cholesky_logdet,
    index_range,
    invert,
    minor,
    omit_append,
)

log = logging.getLogger(__name__)

METHODS = ("auto", "schur", "minors", "closed")


@dataclass(frozen=True, eq=False)
class BandDecomposition:
    """Result of :func:`decompose`.

    Attributes
    ----------
    delay : int
    r : ndarray
        ``inv(Q)`` where ``Q`` is the banded positive definite factor.
    gamma : ndarray
        Anti-banded remainder ``theta - r``; exactly zero on the band.
    q_logdet : float
        ``log det Q = -log det r``.
    """

    delay: int
    r: np.ndarray
    gamma: np.ndarray
    q_logdet: float

    @property
    def n(self) -> int:
        return self.r.shape[0]

    @property
    def theta(self) -> np.ndarray:
        return self.r + self.gamma

    @functools.cached_property
    def q(self) -> np.ndarray:
        """The banded factor ``inv(r)``; off-band entries are rounding noise."""
        return invert(self.r)

    def offband_residual(self) -> float:
        """Largest ``|inv(r)[i, j]|`` over ``|i - j| > delay``."""
        outside = ~band_mask(self.n, self.delay)
        return float(np.abs(self.q[outside]).max()) if outside.any() else 0.0


def _validate(theta, delay):
    theta = check_positive_definite(theta, "theta")
    n = theta.shape[0]
    if int(delay) != delay or not 0 <= delay <= n - 1:
        raise InvalidParameter(f"delay must be an integer in [0, {n - 1}], got {delay}")
    return theta, int(delay)


def _finish(r, theta, delay):
    gamma = theta - r
    gamma[band_mask(theta.shape[0], delay)] = 0.0
    try:
        _, r_logdet = cholesky_logdet(r)
    except NotPositiveDefinite as exc:
        raise ResultNotPD(f"completed R is not positive definite (delay={delay}): {exc}") from None
    return BandDecomposition(delay, r, gamma, -r_logdet)


def _band_part(theta, delay):
    return np.where(band_mask(theta.shape[0], delay), theta, 0.0)


def _fill_minors(theta, delay):
    n, D = theta.shape[0], delay
    R = _band_part(theta, D)
    denominators = {}
    for m in range(D + 1, n):
        for i in range(1, n - m + 1):
            inner = index_range(i + 1, i + D)
            if i not in denominators:
                den = minor(R, inner, inner)
                scale = float(np.prod(np.diag(R)[i : i + D]))
                if den <= PD_TOLERANCE * scale:
                    raise SingularPrincipalMinor(f"principal minor on rows {i + 1}..{i + D} is {den:.3e}")
                denominators[i] = den
            num = 0.0
            for j in range(1, D + 1):
                cols = omit_append(i + 1, i + D, i + j, i + m)
                num += (-1) ** (j + D) * R[i - 1, i + j - 1] * minor(R, inner, cols)
            R[i - 1, i + m - 1] = R[i + m - 1, i - 1] = num / denominators[i]
    return R


def _schur_weights(theta, delay):
    """Rows ``w_i`` solving ``theta[C, C] w_i = theta[C, i]`` for every start ``i``."""
    n, D = theta.shape[0], delay
    count = n - D - 1
    start = np.arange(count)
    win = start[:, None] + 1 + np.arange(D)[None, :]
    blocks = theta[win[:, :, None], win[:, None, :]]
    rhs = theta[start[:, None], win]
    try:
        np.linalg.cholesky(blocks)
    except np.linalg.LinAlgError:
        bad = next(k for k in range(count) if np.linalg.eigvalsh(blocks[k])[0] <= 0)
        raise SingularPrincipalMinor(
            f"principal block on rows {bad + 2}..{bad + D + 1} is not positive definite"
        ) from None
    return np.linalg.solve(blocks, rhs[:, :, None])[:, :, 0], win


def _fill_schur(theta, delay):
    n, D = theta.shape[0], delay
    R = _band_part(theta, D)
    if D == 0 or D >= n - 1:
        return R
    weights, win = _schur_weights(theta, D)
    for m in range(D + 1, n):
        a = np.arange(n - m)
        # entries R[a+1..a+D, a+m] lie on diagonals m-1..m-D, already filled
        vals = np.einsum("ak,ak->a", weights[a], R[win[a], (a + m)[:, None]])
        R[a, a + m] = vals
        R[a + m, a] = vals
    return R


def decompose(theta, delay: int, method: str = "auto") -> BandDecomposition:
    """Split ``theta`` into ``R + gamma`` with ``inv(R)`` banded of half-width ``delay``.

    ``method="auto"`` uses the closed form for ``delay == 0`` and the Schur
    route otherwise.
    """
    if method not in METHODS:
        raise InvalidParameter(f"method must be one of {METHODS}, got {method!r}")
    theta, delay = _validate(theta, delay)
    if method == "auto":
        method = "closed" if delay == 0 else "schur"
    if method == "closed":
        if delay == 0:
            return decompose_closed_form_d0(theta)
        if delay == 1:
            return decompose_closed_form_d1(theta)
        raise InvalidParameter("closed form exists only for delay 0 or 1")
    log.debug("decompose n=%d delay=%d method=%s", theta.shape[0], delay, method)
    fill = _fill_minors if method == "minors" else _fill_schur
    return _finish(fill(theta, delay), theta, delay)


def decompose_closed_form_d0(theta) -> BandDecomposition:
    """No delay: ``R`` is the diagonal of ``theta``."""
    theta, _ = _validate(theta, 0)
    d = np.diag(theta)
    gamma = theta - np.diag(d)
    np.fill_diagonal(gamma, 0.0)
    return BandDecomposition(0, np.diag(d), gamma, -float(np.sum(np.log(d))))


def decompose_closed_form_d1(theta) -> BandDecomposition:
    """One-period delay: ``inv(R)`` is tridiagonal.

    Off-band entries follow the product rule for inverses of tridiagonal
    matrices, ``R[i, j] = prod(theta[k, k+1], k=j..i-1) / prod(theta[k, k], k=j+1..i-1)``,
    and ``det R`` is the matching ratio of 2x2 and 1x1 band minors.
    """
    theta = check_positive_definite(theta, "theta")
    n = theta.shape[0]
    if n < 2:
        raise InvalidParameter("the delay-1 closed form needs n >= 2")
    d = np.diag(theta)
    if d.min() <= PD_TOLERANCE * d.max():
        raise ZeroDivisionError("diagonal of theta is numerically zero")
    off = np.diag(theta, 1)
    ratio = off / d[:-1]
    R = _band_part(theta, 1)
    for m in range(2, n):
        j = np.arange(n - m)
        vals = R[j, j + m - 1] * ratio[j + m - 1]
        R[j, j + m] = vals
        R[j + m, j] = vals
    gamma = theta - R
    gamma[band_mask(n, 1)] = 0.0
    r_logdet = float(np.sum(np.log(d[:-1] * d[1:] - off**2)) - np.sum(np.log(d[1:-1])))
    return BandDecomposition(1, R, gamma, -r_logdet)
