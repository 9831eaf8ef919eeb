import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmperiodogram.errors import ResourceError
from lmperiodogram.filtermodel import FarimaSpec
from lmperiodogram.spectral import (
    EXACT_COV_MAX_N,
    asymptotic_cov,
    exact_dft_cov,
    exact_dft_cov_matrix,
    fourier_frequencies,
    kernel_value,
    n_tilde,
    sigma_r,
    tapered_dft_all,
    validate_frequencies,
)


def brute_dft(x, r, k):
    n = len(x)
    t = np.arange(1, n + 1)
    h = (1 - np.exp(2j * np.pi * t / n)) ** r
    lam = 2 * np.pi * k / n
    return np.sum(h * x * np.exp(1j * t * lam)) / math.sqrt(2 * np.pi * n * math.comb(2 * r, r))


def test_n_tilde():
    assert n_tilde(250, 1) == 123
    assert n_tilde(64, 0) == 31


def test_cosine_coefficient():
    n, k = 64, 5
    t = np.arange(1, n + 1)
    dft = tapered_dft_all(np.cos(2 * np.pi * k * t / n), 0)
    # |sum cos(t lam_k) e^{i t lam_k}| = n/2, normalized by sqrt(2 pi n)
    assert abs(dft.coeffs[k - 1]) == pytest.approx(n / 2 / math.sqrt(2 * math.pi * n), rel=1e-12)
    assert abs(dft.coeffs[k - 1]) == pytest.approx(1.5957691216, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(8, 80), r=st.integers(0, 3), seed=st.integers(0, 2**32 - 1))
def test_binomial_taper_identity(n, r, seed):
    if n < 2 * r + 3:
        return
    x = np.random.default_rng(seed).standard_normal(n)
    dft = tapered_dft_all(x, r)
    for k in (1, dft.coeffs.size):
        assert abs(dft.coeffs[k - 1] - brute_dft(x, r, k)) < 1e-10 * max(1, abs(brute_dft(x, r, k)))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(8, 200), r=st.integers(1, 3), c=st.floats(-1e3, 1e3), seed=st.integers(0, 2**32 - 1))
def test_mean_shift_invariance(n, r, c, seed):
    if n <= 2 * r + 1:
        return
    x = np.random.default_rng(seed).standard_normal(n)
    a = tapered_dft_all(x, r).coeffs
    b = tapered_dft_all(x + c, r).coeffs
    assert np.max(np.abs(a - b)) < 1e-10 * max(1.0, abs(c))


def test_batched_dft():
    X = np.random.default_rng(0).standard_normal((4, 100))
    batch = tapered_dft_all(X, 2).coeffs
    for i in range(4):
        np.testing.assert_allclose(batch[i], tapered_dft_all(X[i], 2).coeffs, atol=1e-13)


def test_too_short():
    with pytest.raises(ValueError):
        tapered_dft_all(np.ones(3), 1)
    with pytest.raises(ValueError):
        tapered_dft_all(np.ones(4), 1)
    assert tapered_dft_all(np.ones(5), 1).coeffs.size == 1


def test_sigma_one():
    assert [sigma_r(1, l) for l in (0, 1, 2)] == [1.0, -0.5, 0.0]
    assert sigma_r(1, -1) == -0.5
    assert sigma_r(2, 1) == pytest.approx(-4 / 6)


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("n", [64, 256, 1000])
def test_kernel_vanishes_at_fourier_frequencies(r, n):
    k = np.arange(1, n - r)
    assert np.max(np.abs(kernel_value(r, n, fourier_frequencies(n, k)))) < 1e-9


def test_kernel_at_zero_and_brute_force():
    n, r = 50, 2
    t = np.arange(1, n + 1)
    h = (1 - np.exp(2j * np.pi * t / n)) ** r
    for lam in (0.0, 0.013, 1.1, -2.5):
        ref = np.sum(h * np.exp(1j * t * lam)) / math.sqrt(n * math.comb(2 * r, r))
        assert abs(kernel_value(r, n, lam) - ref) < 1e-11


@pytest.mark.parametrize("r", [0, 1, 2])
def test_white_noise_dft_covariance(r):
    n = 128
    ks = list(range(1, 12))
    cov = exact_dft_cov_matrix(FarimaSpec(), n, r, ks)
    expect = np.array([[sigma_r(r, a - b) for b in ks] for a in ks])
    assert np.max(np.abs(cov.herm - expect)) < 1e-10
    assert np.max(np.abs(cov.pseudo)) < 1e-10


def test_white_noise_covariance_against_simulation_oracle():
    # double-sum oracle: E d_k conj(d_j) = (2 pi n a_r)^{-1} sum_t |h_t|^{2r}-weighted phases
    n, r, k, j = 40, 1, 3, 4
    t = np.arange(1, n + 1)
    h = (1 - np.exp(2j * np.pi * t / n)) ** r
    a = h * np.exp(1j * t * 2 * np.pi * k / n)
    b = h * np.exp(1j * t * 2 * np.pi * j / n)
    ref = np.sum(a * np.conj(b)) / (n * math.comb(2 * r, r))
    herm, pseudo = exact_dft_cov(FarimaSpec(), n, r, k, j)
    assert abs(herm - ref) < 1e-12 and abs(pseudo) < 1e-12


def test_long_memory_second_moment():
    herm, _ = exact_dft_cov(FarimaSpec(0.3), 512, 1, 10, 10)
    assert herm.real == pytest.approx(0.97227, abs=5e-5)


def test_exact_covariance_matches_monte_carlo():
    from lmperiodogram.simulate import SeedSpec, simulate_gaussian_exact

    spec, n, r = FarimaSpec(0.3), 64, 1
    W = np.stack([tapered_dft_all(np.asarray(simulate_gaussian_exact(spec, n, SeedSpec(8, i))), r).normalized(spec)[[1, 2]] for i in range(6000)])
    emp = np.mean(W[:, 0] * np.conj(W[:, 1]))
    herm, _ = exact_dft_cov(spec, n, r, 2, 3)
    assert abs(emp - herm) < 0.05


def test_cov_symmetry_in_order():
    h1, p1 = exact_dft_cov(FarimaSpec(0.2), 128, 1, 3, 7)
    h2, p2 = exact_dft_cov(FarimaSpec(0.2), 128, 1, 7, 3)
    assert h1 == pytest.approx(np.conj(h2), abs=1e-14) and p1 == pytest.approx(p2, abs=1e-14)


def test_resource_cap():
    with pytest.raises(ResourceError):
        exact_dft_cov_matrix(FarimaSpec(), EXACT_COV_MAX_N + 1, 0, (1,))


def test_truncated_lags_reported():
    cov = exact_dft_cov_matrix(FarimaSpec(0.3), 256, 1, (5,), max_lag=100)
    full = exact_dft_cov_matrix(FarimaSpec(0.3), 256, 1, (5,))
    assert abs(cov.herm[0, 0] - full.herm[0, 0]) <= cov.tail_bound
    assert cov.tail_bound > 0


def test_frequency_validation():
    with pytest.raises(ValueError):
        validate_frequencies((3, 2))
    with pytest.raises(ValueError):
        validate_frequencies((0,))
    with pytest.raises(ValueError):
        exact_dft_cov_matrix(FarimaSpec(), 32, 1, (20,))


def test_asymptotic_cov():
    V = asymptotic_cov((4, 5), 1)
    assert V[0, 0] == 0.5 and V[0, 2] == -0.25 and V[0, 1] == 0


def test_periodogram_csv(tmp_path):
    dft = tapered_dft_all(np.random.default_rng(0).standard_normal(20), 1)
    p = tmp_path / "p.csv"
    dft.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "k,lambda_k,I_rk" and len(lines) == dft.n_tilde + 1
