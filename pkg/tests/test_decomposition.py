import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import root

from delayhedge.decomposition import (
    decompose,
    decompose_closed_form_d0,
    decompose_closed_form_d1,
)
from delayhedge.errors import InvalidParameter, NotPositiveDefinite, SingularPrincipalMinor
from delayhedge.hedging import solve
from delayhedge.linalg import band_mask, cholesky_logdet, is_positive_definite
from delayhedge.models import FbmSpec, fbm_model, kms_model, kms_precision

from helpers import random_pd


def root_oracle(theta, delay):
    """Solve for the off-band entries of R by driving inv(R) to zero off the band."""
    n = theta.shape[0]
    iu = np.triu_indices(n, delay + 1)
    if iu[0].size == 0:
        return theta.copy()

    def build(x):
        R = np.where(band_mask(n, delay), theta, 0.0)
        R[iu] = x
        R.T[iu] = x
        return R

    sol = root(lambda x: np.linalg.inv(build(x))[iu], theta[iu], method="hybr", tol=1e-14)
    assert np.abs(sol.fun).max() <= 1e-13, sol.message
    return build(sol.x)


def local_inverse_q(theta, delay):
    """Banded factor assembled from inverses of the overlapping band blocks of theta."""
    n = theta.shape[0]
    Q = np.zeros_like(theta)
    for i in range(n - delay):
        s = slice(i, i + delay + 1)
        Q[s, s] += np.linalg.inv(theta[s, s])
    for i in range(1, n - delay):
        s = slice(i, i + delay)
        Q[s, s] -= np.linalg.inv(theta[s, s])
    return Q


def band_logdet_r(theta, delay):
    n = theta.shape[0]
    big = sum(np.linalg.slogdet(theta[i : i + delay + 1, i : i + delay + 1])[1] for i in range(n - delay))
    small = sum(np.linalg.slogdet(theta[i : i + delay, i : i + delay])[1] for i in range(1, n - delay))
    return big - small


def kms_theta(rho, n):
    return kms_precision(rho, n)


# ---------------------------------------------------------------- examples


@pytest.mark.parametrize("method", ["auto", "schur", "minors"])
def test_full_delay_is_trivial(rng, method):
    theta = random_pd(rng, 6)
    dec = decompose(theta, 5, method=method)
    np.testing.assert_array_equal(dec.r, theta)
    np.testing.assert_array_equal(dec.gamma, np.zeros((6, 6)))


@pytest.mark.parametrize("delay", [0, 1, 2, 4])
@pytest.mark.parametrize("method", ["auto", "schur", "minors"])
def test_diagonal_sigma_is_trivial(delay, method):
    theta = np.diag([1.0, 0.5, 2.0, 4.0, 0.25])
    dec = decompose(theta, delay, method=method)
    np.testing.assert_allclose(dec.r, theta, atol=1e-15)
    np.testing.assert_array_equal(dec.gamma, 0.0)


@pytest.mark.parametrize("method", ["auto", "schur", "minors", "closed"])
def test_kms_n3_delay0(method):
    dec = decompose(kms_theta(0.5, 3), 0, method=method)
    np.testing.assert_allclose(dec.r, np.diag([4 / 3, 5 / 3, 4 / 3]), atol=1e-14)
    expected_gamma = np.array([[0, -2, 0], [-2, 0, -2], [0, -2, 0]]) / 3.0
    np.testing.assert_allclose(dec.gamma, expected_gamma, atol=1e-14)
    assert dec.q_logdet == pytest.approx(-np.log(4 / 3 * 5 / 3 * 4 / 3), rel=1e-14)


def test_closed_d0_identity():
    dec = decompose_closed_form_d0(np.eye(4))
    np.testing.assert_array_equal(dec.r, np.eye(4))
    np.testing.assert_array_equal(dec.gamma, 0.0)
    assert dec.q_logdet == 0.0


def test_closed_d0_determinant(rng):
    theta = random_pd(rng, 7)
    dec = decompose_closed_form_d0(theta)
    assert np.exp(dec.q_logdet) == pytest.approx(1 / np.prod(np.diag(theta)), rel=1e-12)


def test_closed_d1_n2_trivial(rng):
    theta = random_pd(rng, 2)
    dec = decompose_closed_form_d1(theta)
    np.testing.assert_allclose(dec.r, theta)
    np.testing.assert_array_equal(dec.gamma, 0.0)


@pytest.mark.parametrize("rho", [0.2, 0.5, 0.8])
def test_closed_d1_kms_geometric_weights(rho):
    n = 9
    dec = decompose_closed_form_d1(kms_theta(rho, n))
    c = (1 + rho**2) / (1 - rho**2)
    for i in range(n):
        for j in range(i - 1):
            # loading of X_j in position i is (1+rho^2)/(1-rho^2) * (-rho/(1+rho^2))^(i-j)
            assert -dec.gamma[i, j] == pytest.approx(c * (-rho / (1 + rho**2)) ** (i - j), rel=1e-12, abs=1e-15)


def test_closed_d1_product_formula(rng):
    theta = random_pd(rng, 6)
    dec = decompose_closed_form_d1(theta)
    for i in range(6):
        for j in range(i - 1):
            num = np.prod([theta[k, k + 1] for k in range(j, i)])
            den = np.prod([theta[k, k] for k in range(j + 1, i)])
            assert dec.r[i, j] == pytest.approx(num / den, rel=1e-12)


@pytest.mark.parametrize("rho", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("n", [3, 5, 12])
def test_closed_d1_matches_algorithm_on_tridiagonal(rho, n):
    theta = kms_theta(rho, n)
    a = decompose_closed_form_d1(theta)
    b = decompose(theta, 1, method="minors")
    c = decompose(theta, 1, method="schur")
    np.testing.assert_allclose(a.r, b.r, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(a.r, c.r, rtol=1e-9, atol=1e-12)
    assert a.q_logdet == pytest.approx(c.q_logdet, rel=1e-9)


# ---------------------------------------------------------------- oracles


@pytest.mark.parametrize("n,delay", [(3, 0), (4, 1), (5, 1), (5, 2), (6, 3), (7, 2), (8, 4)])
def test_matches_root_finding_oracle(rng, n, delay):
    theta = random_pd(rng, n, cond=50.0)
    expected = root_oracle(theta, delay)
    for method in ("schur", "minors"):
        np.testing.assert_allclose(decompose(theta, delay, method=method).r, expected, rtol=1e-9, atol=1e-11)


@pytest.mark.parametrize("n,delay", [(6, 0), (6, 1), (10, 3), (16, 5), (24, 2), (32, 7)])
def test_matches_local_inverse_oracle(rng, n, delay):
    theta = random_pd(rng, n, cond=1e3)
    dec = decompose(theta, delay)
    Q = local_inverse_q(theta, delay)
    assert np.abs(Q[~band_mask(n, delay)]).max(initial=0.0) == 0.0
    np.testing.assert_allclose(dec.q, Q, rtol=1e-8, atol=1e-10 * np.abs(Q).max())
    assert dec.q_logdet == pytest.approx(-band_logdet_r(theta, delay), rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("hurst", [0.2, 0.7])
def test_large_fbm_against_local_inverse(hurst):
    theta = fbm_model(FbmSpec(hurst, 256)).theta
    dec = decompose(theta, 4)
    assert dec.q_logdet == pytest.approx(-band_logdet_r(theta, 4), rel=1e-10)
    Q = local_inverse_q(theta, 4)
    assert np.abs(dec.q - Q).max() <= 1e-8 * np.abs(Q).max()


def test_minors_route_respects_laplace_sign():
    # first unknown R[1, D+2] must make the minor rows [1:D+1], cols [2:D+2] vanish
    from delayhedge.linalg import index_range, minor

    theta = random_pd(np.random.default_rng(3), 7, cond=20.0)
    for delay in (1, 2, 3):
        R = decompose(theta, delay, method="minors").r
        for i in range(1, 7 - delay):
            for m in range(delay + 1, 7 - i + 1):
                cols = index_range(i + 1, i + delay) + (i + m,)
                assert abs(minor(R, index_range(i, i + delay), cols)) <= 1e-12


# ---------------------------------------------------------------- errors


def test_rejects_bad_delay(rng):
    theta = random_pd(rng, 4)
    for delay in (-1, 4, 1.5):
        with pytest.raises(InvalidParameter):
            decompose(theta, delay)
    with pytest.raises(InvalidParameter):
        decompose(theta, 2, method="closed")
    with pytest.raises(InvalidParameter):
        decompose(theta, 1, method="magic")


def test_rejects_indefinite_input():
    with pytest.raises(NotPositiveDefinite):
        decompose(np.array([[1.0, 2.0], [2.0, 1.0]]), 0)


def test_singular_block_detected():
    from delayhedge.decomposition import _fill_minors, _fill_schur

    theta = np.eye(4)
    theta[1, 1] = 0.0
    with pytest.raises(SingularPrincipalMinor):
        _fill_minors(theta, 1)
    with pytest.raises(SingularPrincipalMinor):
        _fill_schur(theta, 1)


# ---------------------------------------------------------------- properties

suite = st.tuples(st.integers(2, 32), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))


def _draw(case):
    n, seed, frac = case
    rng = np.random.default_rng(seed)
    return random_pd(rng, n, cond=1e4), min(int(frac * n), n - 1)


@settings(max_examples=80, deadline=None)
@given(suite)
def test_structural_invariants(case):
    theta, delay = _draw(case)
    n = theta.shape[0]
    dec = decompose(theta, delay)
    assert np.all(dec.gamma[band_mask(n, delay)] == 0.0)
    np.testing.assert_array_equal(dec.r, dec.r.T)
    assert np.abs(theta - dec.r - dec.gamma).max() <= 1e-9 * np.abs(theta).max()
    assert is_positive_definite(dec.r)
    assert dec.offband_residual() <= 1e-8


@settings(max_examples=40, deadline=None)
@given(suite)
def test_closed_forms_agree_with_algorithm(case):
    theta, _ = _draw(case)
    for delay, closed in ((0, decompose_closed_form_d0), (1, decompose_closed_form_d1)):
        a = closed(theta)
        b = decompose(theta, delay, method="schur")
        scale = np.abs(a.r).max()
        assert np.abs(a.r - b.r).max() <= 1e-9 * scale
        assert np.abs(a.gamma - b.gamma).max() <= 1e-9 * scale


@settings(max_examples=25, deadline=None)
@given(st.tuples(st.integers(2, 9), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0)))
def test_routes_agree(case):
    theta, delay = _draw(case)
    a = decompose(theta, delay, method="minors")
    b = decompose(theta, delay, method="schur")
    assert np.abs(a.r - b.r).max() <= 1e-9 * np.abs(a.r).max()


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(2, 20), st.integers(0, 2**32 - 1)))
def test_logdet_monotone_in_delay(case):
    n, seed = case
    sigma = random_pd(np.random.default_rng(seed), n, cond=1e3)
    theta = np.linalg.inv(sigma)
    logq = [decompose(theta, d).q_logdet for d in range(n)]
    assert all(b >= a - 1e-10 for a, b in zip(logq, logq[1:]))
    # log|Q| <= log|Sigma|, attained at the full delay
    assert logq[-1] == pytest.approx(cholesky_logdet(sigma)[1], abs=1e-9)
    assert max(logq) <= cholesky_logdet(sigma)[1] + 1e-12 + 1e-9


def test_logdet_strictly_below_when_gamma_nonzero():
    m = kms_model(0.6, 10)
    for d in range(9):
        dec, _, _ = solve(m, d)
        assert np.abs(dec.gamma).max() > 0
        assert dec.q_logdet < m.logdet_sigma - 1e-12
