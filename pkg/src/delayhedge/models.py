"""Market models: Gaussian increments ``X ~ N(mu, sigma)`` over ``n`` periods."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import toeplitz

from .errors import DimensionMismatch, InvalidParameter, NotPositiveDefinite, ParseError
from .linalg import check_positive_definite, check_vector, cholesky_logdet, invert


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarketModel:
    """Increment distribution of a single risky asset.

    ``sigma`` is symmetrized on construction and must be positive definite.
    ``s0`` is carried for bookkeeping only; nothing depends on it.
    """

    mu: np.ndarray
    sigma: np.ndarray
    s0: float = 0.0
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        sigma = check_positive_definite(self.sigma, "sigma")
        mu = check_vector(self.mu, sigma.shape[0], "mu")
        object.__setattr__(self, "sigma", _frozen(sigma))
        object.__setattr__(self, "mu", _frozen(mu))
        object.__setattr__(self, "s0", float(self.s0))

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    @functools.cached_property
    def theta(self) -> np.ndarray:
        """Precision matrix, the inverse of ``sigma``."""
        return _frozen(invert(self.sigma))

    @functools.cached_property
    def logdet_sigma(self) -> float:
        return cholesky_logdet(self.sigma)[1]

    @functools.cached_property
    def quad_term(self) -> float:
        """``mu @ theta @ mu``."""
        return float(self.mu @ self.theta @ self.mu)


@dataclass(frozen=True)
class FbmSpec:
    hurst: float
    n: int
    dt: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.hurst < 1.0:
            raise InvalidParameter(f"hurst must lie in (0, 1), got {self.hurst}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameter(f"n must be a positive integer, got {self.n}")
        if not self.dt > 0:
            raise InvalidParameter(f"dt must be positive, got {self.dt}")

    @property
    def horizon(self) -> float:
        return self.n * self.dt


def _mu(mu, n):
    return np.zeros(n) if mu is None else check_vector(mu, n, "mu")


def kms_covariance(rho: float, n: int) -> np.ndarray:
    """Kac-Murdock-Szego matrix ``rho ** |i - j|``."""
    return toeplitz(float(rho) ** np.arange(n))


def kms_model(rho: float, n: int, mu=None, allow_negative: bool = False) -> MarketModel:
    """Increments with correlation ``rho ** |i - j|`` and unit variance.

    ``rho`` must lie in (0, 1) unless ``allow_negative`` is set, in which
    case any ``|rho| < 1`` is admitted.
    """
    if n < 1:
        raise InvalidParameter(f"n must be positive, got {n}")
    ok = abs(rho) < 1.0 if allow_negative else 0.0 < rho < 1.0
    if not ok:
        raise InvalidParameter(f"rho must lie in {'(-1, 1)' if allow_negative else '(0, 1)'}, got {rho}")
    return MarketModel(_mu(mu, n), kms_covariance(rho, n), name=f"kms(rho={rho:g}, n={n})")


def kms_precision(rho: float, n: int) -> np.ndarray:
    """Closed-form tridiagonal inverse of the KMS matrix."""
    c = 1.0 / (1.0 - rho * rho)
    P = np.zeros((n, n))
    if n == 1:
        P[0, 0] = 1.0
        return P
    idx = np.arange(n)
    P[idx, idx] = (1.0 + rho * rho) * c
    P[0, 0] = P[-1, -1] = c
    P[idx[:-1], idx[1:]] = P[idx[1:], idx[:-1]] = -rho * c
    return P


def fbm_autocovariance(hurst: float, n: int, dt: float = 1.0) -> np.ndarray:
    """Autocovariance of fractional Gaussian noise at lags ``0, ..., n-1``."""
    k = np.arange(n, dtype=float)
    two_h = 2.0 * hurst
    return 0.5 * dt**two_h * (np.abs(k - 1) ** two_h + (k + 1) ** two_h - 2.0 * k**two_h)


def fbm_model(spec: FbmSpec, mu=None) -> MarketModel:
    """Increments of fractional Brownian motion sampled every ``spec.dt``."""
    sigma = toeplitz(fbm_autocovariance(spec.hurst, spec.n, spec.dt))
    try:
        return MarketModel(
            _mu(mu, spec.n), sigma, name=f"fbm(H={spec.hurst:g}, n={spec.n}, dt={spec.dt:g})"
        )
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(
            f"fBm covariance for H={spec.hurst}, n={spec.n} lost positive definiteness numerically",
            exc.min_pivot,
        ) from None


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line.split()


def _floats(tokens, lineno):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"line {lineno}: expected real numbers, got {' '.join(tokens)!r}") from None


def parse_model(text: str) -> MarketModel:
    """Parse the plain-text model format.

    ::

        n 2
        s0 100
        mu 0 0
        1 0
        0 1
    """
    lines = list(_content_lines(text))
    if len(lines) < 3:
        raise ParseError("model file needs 'n', 's0' and 'mu' lines followed by the covariance rows")
    header = {}
    for (lineno, tokens), key in zip(lines[:3], ("n", "s0", "mu")):
        if tokens[0] != key:
            raise ParseError(f"line {lineno}: expected '{key}', got {tokens[0]!r}")
        header[key] = (lineno, tokens[1:])

    lineno, tokens = header["n"]
    if len(tokens) != 1:
        raise ParseError(f"line {lineno}: 'n' takes one integer")
    try:
        n = int(tokens[0])
    except ValueError:
        raise ParseError(f"line {lineno}: 'n' must be an integer, got {tokens[0]!r}") from None
    if n < 1:
        raise ParseError(f"line {lineno}: n must be positive")

    lineno, tokens = header["s0"]
    s0 = _floats(tokens, lineno)
    if len(s0) != 1:
        raise ParseError(f"line {lineno}: 's0' takes one real number")

    lineno, tokens = header["mu"]
    mu = _floats(tokens, lineno)
    if len(mu) != n:
        raise DimensionMismatch(f"mu has {len(mu)} entries, expected n={n}")

    rows = lines[3:]
    if len(rows) != n:
        raise DimensionMismatch(f"expected {n} covariance rows, got {len(rows)}")
    sigma = []
    for lineno, tokens in rows:
        row = _floats(tokens, lineno)
        if len(row) != n:
            raise DimensionMismatch(f"line {lineno}: covariance row has {len(row)} entries, expected {n}")
        sigma.append(row)
    return MarketModel(np.array(mu), np.array(sigma), s0=s0[0])


def load_model(path) -> MarketModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 text ({exc})") from None
    model = parse_model(text)
    object.__setattr__(model, "name", path.name)
    return model


def format_model(model: MarketModel) -> str:
    """Inverse of :func:`parse_model`; floats use shortest round-trip repr."""
    lines = [f"n {model.n}", f"s0 {model.s0!r}", "mu " + " ".join(repr(float(v)) for v in model.mu)]
    lines += [" ".join(repr(float(v)) for v in row) for row in model.sigma]
    return "\n".join(lines) + "\n"
