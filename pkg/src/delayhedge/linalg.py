"""Dense symmetric linear-algebra primitives and input validation helpers.

Matrices are plain ``numpy`` arrays.  Index vectors passed to :func:`minor`
and returned by :func:`omit_append` are 1-based, so that ``[a:b]`` in the
documentation maps one-to-one onto ``index_range(a, b)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidRange, NotPositiveDefinite

PD_TOLERANCE = 1e-12


def as_square(A, name="matrix"):
    """Return ``A`` as a 2-D float array, checking that it is square and finite."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def as_symmetric(A, name="matrix"):
    """Symmetrize by averaging with the transpose.

    The result is exactly symmetric, which the band recursion relies on.
    """
    A = as_square(A, name)
    return 0.5 * (A + A.T)


def check_vector(v, n, name="vector"):
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        v = np.full(n, float(v))
    if v.shape != (n,):
        raise DimensionMismatch(f"{name} must have length {n}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def cholesky_logdet(A, tol=PD_TOLERANCE):
    """Cholesky factor and log-determinant of a symmetric matrix.

    Raises :class:`NotPositiveDefinite` when a pivot is at or below
    ``tol`` times the largest diagonal entry.

    Returns
    -------
    F : ndarray
        Lower-triangular factor with positive diagonal, ``A = F @ F.T``.
    logdet : float
    """
    A = as_square(A)
    scale = np.max(np.abs(np.diag(A)))
    try:
        F = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(min_pivot=float(np.linalg.eigvalsh(0.5 * (A + A.T))[0])) from None
    pivots = np.diag(F) ** 2
    if scale <= 0 or pivots.min() <= tol * scale:
        raise NotPositiveDefinite(min_pivot=float(pivots.min()))
    return F, 2.0 * float(np.sum(np.log(np.diag(F))))


def logdet(A):
    return cholesky_logdet(A)[1]


def is_positive_definite(A, tol=PD_TOLERANCE):
    try:
        cholesky_logdet(A, tol)
    except NotPositiveDefinite:
        return False
    return True


def check_positive_definite(A, name="matrix"):
    """Symmetrize ``A`` and raise unless it is numerically positive definite."""
    A = as_symmetric(A, name)
    try:
        cholesky_logdet(A)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(f"{name} is not positive definite", exc.min_pivot) from None
    return A


def invert(A):
    """Inverse of a positive definite matrix via two triangular solves."""
    from scipy.linalg import cho_solve

    A = as_symmetric(A)
    F, _ = cholesky_logdet(A)
    inv = cho_solve((F, True), np.eye(A.shape[0]))
    return 0.5 * (inv + inv.T)


def _zero_based(indices: Sequence[int], n: int) -> np.ndarray:
    idx = np.asarray(indices, dtype=int).reshape(-1)
    if idx.size and (idx.min() < 1 or idx.max() > n):
        raise DimensionMismatch(f"indices must lie in [1, {n}], got {list(idx)}")
    return idx - 1


def minor(A, I: Sequence[int], J: Sequence[int]) -> float:
    """Determinant of ``A[I, J]`` for 1-based index vectors ``I`` and ``J``.

    The empty minor is 1.  ``A`` need not be symmetric.
    """
    A = np.asarray(A, dtype=float)
    if len(I) != len(J):
        raise DimensionMismatch(f"index vectors differ in length: {len(I)} != {len(J)}")
    if len(I) == 0:
        return 1.0
    rows = _zero_based(I, A.shape[0])
    cols = _zero_based(J, A.shape[1])
    # np.linalg.det factors by LU with partial pivoting
    return float(np.linalg.det(A[np.ix_(rows, cols)]))


def index_range(a: int, b: int) -> tuple[int, ...]:
    """The vector ``(a, a+1, ..., b)``; empty when ``b < a``."""
    return tuple(range(a, b + 1))


def omit_append(a: int, b: int, i: int, j: int) -> tuple[int, ...]:
    """Drop ``i`` from ``(a, ..., b)`` and append ``j`` as the last coordinate."""
    if not a <= i <= b <= j:
        raise InvalidRange(f"need a <= i <= b <= j, got a={a}, i={i}, b={b}, j={j}")
    return tuple(k for k in range(a, b + 1) if k != i) + (j,)


def leading_minors_positive(A) -> bool:
    """Sylvester's criterion: every leading principal minor is positive."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    return all(minor(A, index_range(1, k), index_range(1, k)) > 0 for k in range(1, n + 1))


def band_mask(n: int, width: int) -> np.ndarray:
    """Boolean mask of entries with ``|i - j| <= width``."""
    k = np.arange(n)
    return np.abs(k[:, None] - k[None, :]) <= width
