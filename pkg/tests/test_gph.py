import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmperiodogram.errors import DegenerateDataError
from lmperiodogram.filtermodel import FarimaSpec, InnovationSpec
from lmperiodogram.gph import (
    ETA_BAR,
    SIGMA2,
    bandwidth_weights,
    check_bandwidth,
    estimate,
    estimate_from_periodogram,
    mse_decomposition,
    regression_indices,
    regressors,
)
from lmperiodogram.simulate import SeedSpec, simulate_truncated_ma
from lmperiodogram.spectral import fourier_frequencies, n_tilde


def test_constants():
    assert ETA_BAR == pytest.approx(-0.5772156649, abs=1e-10)
    assert SIGMA2 == pytest.approx(1.6449340668, abs=1e-10)


def test_regression_indices():
    assert list(regression_indices(3, 1)) == [3, 5, 7]
    assert list(regression_indices(3, 0)) == [2, 3, 4]


def test_bandwidth_limit():
    nt = n_tilde(250, 1)
    check_bandwidth(250, 60, 1)
    with pytest.raises(ValueError, match=r"\(r\+1\)\(m\+1\) < n_tilde"):
        check_bandwidth(250, 61, 1)
    assert 2 * 62 >= nt
    with pytest.raises(ValueError):
        check_bandwidth(250, 1, 1)


def test_regressors_centered():
    nu, s2 = regressors(1024, 64, 1)
    assert abs(nu.sum()) < 1e-12
    assert s2 == pytest.approx(nu @ nu)


def exact_power_law(n, m, r, d, c=0.7):
    nt = n_tilde(n, r)
    lam = fourier_frequencies(n, np.arange(1, nt + 1))
    return c * np.abs(2 * np.sin(lam / 2)) ** (-2 * d)


@pytest.mark.parametrize("d", [-0.3, 0.0, 0.1, 0.45])
def test_exact_linear_recovery(d):
    n, m, r = 512, 40, 1
    fit = estimate_from_periodogram(exact_power_law(n, m, r, d), n, m, r)
    assert abs(fit.d_hat - d) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-3, 1e3))
def test_scale_invariance(seed, scale):
    x = np.random.default_rng(seed).standard_normal(256)
    a = estimate(x, 20, 1).d_hat
    b = estimate(scale * x, 20, 1).d_hat
    assert abs(a - b) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), shift=st.floats(-100, 100))
def test_mean_shift_invariance(seed, shift):
    x = np.random.default_rng(seed).standard_normal(256)
    assert abs(estimate(x, 20, 1).d_hat - estimate(x + shift, 20, 1).d_hat) < 1e-9


def test_zero_ordinate_is_degenerate():
    I = np.ones(123)
    I[2] = 0
    with pytest.raises(DegenerateDataError):
        estimate_from_periodogram(I, 250, 10, 1)


def test_bandwidth_weights_agree():
    x = np.random.default_rng(3).standard_normal(300)
    from lmperiodogram.spectral import tapered_dft_all

    I = tapered_dft_all(x, 1).periodogram
    W = bandwidth_weights(300, [10, 20, 30], 1)
    logI = np.log(I[regression_indices(30, 1) - 1])
    for i, m in enumerate([10, 20, 30]):
        assert W[i] @ logI == pytest.approx(estimate(x, m, 1).d_hat, abs=1e-13)


def test_estimate_reasonable():
    x = simulate_truncated_ma(FarimaSpec(0.3), InnovationSpec.parse("gaussian"), 4096, 5000, SeedSpec(1))
    fit = estimate(np.asarray(x), 200, 1)
    assert abs(fit.d_hat - 0.3) < 4 * math.sqrt(SIGMA2 / fit.s_m2)


def test_mse_decomposition_fractional_noise_no_bias():
    x = np.random.default_rng(0).standard_normal(256)
    fit = estimate(x, 20)
    W, b = mse_decomposition(fit, FarimaSpec(0.0))
    assert b == 0.0 and W == pytest.approx(fit.d_hat)


def test_mse_decomposition_ar_bias_sign():
    nu, s2 = regressors(250, 37, 1)
    from lmperiodogram.gph import GphFit

    fit = GphFit(0.3, 37, s2, nu, 1, 250)
    _, b_pos = mse_decomposition(fit, FarimaSpec(0.3, (0.3,)))
    _, b_neg = mse_decomposition(fit, FarimaSpec(0.3, (-0.3,)))
    # a decreasing short-memory factor pushes the estimate up
    assert b_pos > 0 > b_neg
