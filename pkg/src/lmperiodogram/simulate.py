"""Innovation draws and sample paths of the linear process."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import NumericalDegeneracyError
from .filtermodel import (
    PARETO_INDEX,
    PARETO_SHIFT,
    PARETO_VARIANCE,
    SIM_TRUNCATION,
    FarimaSpec,
    InnovationKind,
    InnovationSpec,
    autocovariance,
    ma_coefficients,
)

__all__ = [
    "SeedSpec",
    "TimeSeries",
    "as_generator",
    "sample_innovations",
    "filter_innovations",
    "simulate_truncated_ma",
    "durbin_levinson",
    "simulate_gaussian_exact",
    "write_series_csv",
    "read_series_csv",
    "EXACT_MAX_N",
]

# Durbin-Levinson sampling is O(n^2); longer series are refused.
EXACT_MAX_N = 2**16
# Below this many multiply-adds the direct convolution is used.
_DIRECT_CONV_LIMIT = 200_000


@dataclass(frozen=True)
class SeedSpec:
    """Reproducible stream identifier: one master seed, one replication counter."""

    master_seed: int
    replication_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if int(self.replication_index) < 0:
            raise ValueError("replication_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        # spawn_key mixing gives independent streams per (seed, index), whatever the scheduling
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.replication_index),))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SeedSpec):
        return seed.generator()
    return SeedSpec(int(seed)).generator()


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("a time series needs at least one value")
        if not np.all(np.isfinite(v)):
            raise ValueError("time series values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def sample_innovations(spec: InnovationSpec, count: int, seed) -> np.ndarray:
    """Draw ``count`` i.i.d. standardized innovations."""
    count = int(count)
    if count < 1:
        raise ValueError("count must be positive")
    rng = as_generator(seed)
    kind = spec.kind
    if kind is InnovationKind.GAUSSIAN:
        return rng.standard_normal(count)
    if kind is InnovationKind.LAPLACE:
        return rng.laplace(0.0, 1.0 / math.sqrt(2.0), count)
    if kind is InnovationKind.CENTERED_EXPONENTIAL:
        return rng.standard_exponential(count) - 1.0
    if kind is InnovationKind.SHIFTED_PARETO:
        # inverse CDF of P(Z <= u) = 1 - (u + 7/6)^(-7); 1 - U is uniform on (0, 1]
        u = 1.0 - rng.random(count)
        z = u ** (-1.0 / PARETO_INDEX) - PARETO_SHIFT
        return z / math.sqrt(PARETO_VARIANCE)
    raise ValueError(f"unsupported innovation kind {kind}")


def filter_innovations(psi: np.ndarray, z: np.ndarray, n: int) -> np.ndarray:
    """Apply the truncated MA filter to innovation rows.

    ``z`` has shape ``(..., T + n)``; entry ``T + t - 1`` is the innovation dated ``t``,
    so ``X_t = sum_{j<T} psi_j z[T + t - 1 - j]`` for ``t = 1..n``.
    """
    psi = np.trim_zeros(np.asarray(psi, dtype=float), "b")
    z = np.asarray(z, dtype=float)
    T = z.shape[-1] - n
    if psi.size == 0:
        return np.zeros(z.shape[:-1] + (n,))
    if psi.size == 1:
        return psi[0] * z[..., T : T + n] if psi[0] != 1.0 else z[..., T : T + n].copy()
    window = z[..., T - psi.size + 1 : T + n]
    if psi.size * n <= _DIRECT_CONV_LIMIT and z.ndim == 1:
        return np.convolve(window, psi, mode="valid")
    kernel = psi.reshape((1,) * (z.ndim - 1) + (-1,))
    return signal.fftconvolve(window, kernel, mode="valid", axes=-1)


def simulate_truncated_ma(
    spec: FarimaSpec,
    innov: InnovationSpec,
    n: int,
    truncation: int = SIM_TRUNCATION,
    seed=0,
    *,
    innovations: np.ndarray | None = None,
) -> TimeSeries:
    """Simulate ``X_1..X_n`` through the MA representation truncated at ``truncation`` lags.

    ``T + n`` innovations are drawn (burn-in of length ``T``). Passing ``innovations``
    (length ``T + n``) bypasses the random draw.
    """
    n = int(n)
    truncation = int(truncation)
    if n < 1:
        raise ValueError("n must be positive")
    psi = ma_coefficients(spec, truncation)
    if innovations is None:
        z = sample_innovations(innov, truncation + n, seed)
    else:
        z = np.asarray(innovations, dtype=float)
        if z.shape != (truncation + n,):
            raise ValueError(f"innovations must have length truncation + n = {truncation + n}")
    return TimeSeries(filter_innovations(psi, z, n))


def durbin_levinson(gamma: np.ndarray):
    """Durbin-Levinson recursion on autocovariances ``gamma(0..n-1)``.

    Returns ``(pacf, variances)`` where ``pacf[h-1]`` is the partial autocorrelation
    at lag ``h`` and ``variances[k]`` the one-step prediction variance given ``k`` values.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.size
    pacf = np.zeros(max(n - 1, 0))
    v = np.empty(n)
    v[0] = gamma[0]
    phi = np.zeros(0)
    for k in range(1, n):
        a = (gamma[k] - phi @ gamma[k - 1 : 0 : -1]) / v[k - 1] if k > 1 else gamma[1] / v[0]
        phi = np.r_[phi - a * phi[::-1], a]
        pacf[k - 1] = a
        v[k] = v[k - 1] * (1.0 - a * a)
    return pacf, v


def simulate_gaussian_exact(spec: FarimaSpec, n: int, seed=0) -> TimeSeries:
    """Exact Gaussian draw with covariance ``gamma(|i - j|)`` by sequential prediction."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if n > EXACT_MAX_N:
        raise ValueError(f"exact simulation is limited to n <= {EXACT_MAX_N}")
    gamma = autocovariance(spec, n - 1)
    e = as_generator(seed).standard_normal(n)
    x = np.empty(n)
    if gamma[0] <= 0:
        raise NumericalDegeneracyError("non-positive variance")
    v = gamma[0]
    x[0] = math.sqrt(v) * e[0]
    phi = np.zeros(0)
    for k in range(1, n):
        a = (gamma[k] - phi @ gamma[k - 1 : 0 : -1]) / v if k > 1 else gamma[1] / v
        phi = np.r_[phi - a * phi[::-1], a]
        v = v * (1.0 - a * a)
        if not v > 0:
            raise NumericalDegeneracyError(f"conditional variance {v:.3g} at step {k} is not positive")
        # phi[i] multiplies X_{k-i} (most recent value first)
        x[k] = phi @ x[k - 1 :: -1] + math.sqrt(v) * e[k]
    return TimeSeries(x)


def write_series_csv(path, x) -> None:
    values = np.asarray(x, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"])
        for v in values:
            w.writerow([repr(float(v))])


def read_series_csv(path) -> TimeSeries:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x"]:
            raise ValueError(f"{path}: expected a single-column CSV with header 'x'")
        values = [float(row[0]) for row in reader if row]
    return TimeSeries(np.array(values))
