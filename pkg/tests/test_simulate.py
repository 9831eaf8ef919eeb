import numpy as np
import pytest

from lmperiodogram.errors import ModelError
from lmperiodogram.filtermodel import FarimaSpec, InnovationSpec, autocovariance, ma_coefficients
from lmperiodogram.simulate import (
    SeedSpec,
    TimeSeries,
    durbin_levinson,
    filter_innovations,
    read_series_csv,
    sample_innovations,
    simulate_gaussian_exact,
    simulate_truncated_ma,
    write_series_csv,
)

GAUSS = InnovationSpec.parse("gaussian")


def test_seed_streams_reproducible_and_distinct():
    a = sample_innovations(GAUSS, 10, SeedSpec(5, 0))
    b = sample_innovations(GAUSS, 10, SeedSpec(5, 0))
    c = sample_innovations(GAUSS, 10, SeedSpec(5, 1))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_truncated_ma_matches_direct_sum():
    spec = FarimaSpec(0.3, (0.3,))
    T, n = 50, 20
    z = np.random.default_rng(0).standard_normal(T + n)
    x = np.asarray(simulate_truncated_ma(spec, GAUSS, n, T, innovations=z))
    psi = ma_coefficients(spec, T)
    ref = [sum(psi[j] * z[T + t - 1 - j] for j in range(T)) for t in range(1, n + 1)]
    np.testing.assert_allclose(x, ref, rtol=1e-12)


def test_white_noise_passthrough():
    z = np.arange(15.0)
    x = np.asarray(simulate_truncated_ma(FarimaSpec(), GAUSS, 5, 10, innovations=z))
    assert np.array_equal(x, z[10:])


def test_batched_filter_agrees():
    psi = ma_coefficients(FarimaSpec(0.3), 300)
    Z = np.random.default_rng(1).standard_normal((3, 300 + 100))
    batch = filter_innovations(psi, Z, 100)
    for i in range(3):
        np.testing.assert_allclose(batch[i], filter_innovations(psi, Z[i], 100), atol=1e-11)


def test_innovation_length_checked():
    with pytest.raises(ValueError):
        simulate_truncated_ma(FarimaSpec(), GAUSS, 5, 10, innovations=np.zeros(3))


def test_durbin_levinson_fractional_pacf():
    d = 0.3
    pacf, v = durbin_levinson(autocovariance(FarimaSpec(d), 40))
    h = np.arange(1, 41)
    np.testing.assert_allclose(pacf, d / (h - d), atol=1e-10)
    assert np.all(np.diff(v) <= 0)


def test_exact_gaussian_covariance():
    spec = FarimaSpec(0.3)
    X = np.stack([np.asarray(simulate_gaussian_exact(spec, 6, SeedSpec(3, i))) for i in range(20000)])
    emp = X.T @ X / X.shape[0]
    g = autocovariance(spec, 5)
    assert abs(emp[0, 0] - g[0]) < 0.05
    assert abs(emp[0, 3] - g[3]) < 0.05


def test_exact_gaussian_deterministic():
    a = simulate_gaussian_exact(FarimaSpec(0.2, (0.3,)), 64, 9)
    b = simulate_gaussian_exact(FarimaSpec(0.2, (0.3,)), 64, 9)
    assert np.array_equal(a.values, b.values)


def test_time_series_validation():
    with pytest.raises(ValueError):
        TimeSeries(np.array([1.0, np.nan]))
    ts = TimeSeries([1.0, 2.0])
    with pytest.raises(ValueError):
        ts.values[0] = 3.0


def test_csv_round_trip_exact(tmp_path):
    x = np.asarray(simulate_truncated_ma(FarimaSpec(0.3), GAUSS, 64, 100, 4))
    path = tmp_path / "s.csv"
    write_series_csv(path, x)
    assert path.read_text().splitlines()[0] == "x"
    assert np.array_equal(np.asarray(read_series_csv(path)), x)


def test_csv_header_checked(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("y\n1\n")
    with pytest.raises(ValueError):
        read_series_csv(p)


def test_invalid_spec():
    with pytest.raises(ModelError):
        FarimaSpec(0.5)


@pytest.mark.parametrize("kind", ["gaussian", "laplace", "pareto", "exponential"])
def test_innovations_standardized(kind):
    z = sample_innovations(InnovationSpec.parse(kind), 400_000, SeedSpec(2, 0))
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1) < 0.03
