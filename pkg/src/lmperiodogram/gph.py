"""Log-periodogram (GPH) regression for the memory parameter."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError
from .filtermodel import FarimaSpec, short_memory_density
from .spectral import fourier_frequencies, n_tilde, tapered_dft_all

__all__ = [
    "GphFit",
    "ETA_BAR",
    "SIGMA2",
    "regression_indices",
    "check_bandwidth",
    "regressors",
    "estimate",
    "estimate_from_periodogram",
    "bandwidth_weights",
    "mse_decomposition",
]

# E log ||Y||^2 and var log ||Y||^2 for Y ~ N(0, I_2 / 2), i.e. ||Y||^2 ~ Exp(1).
ETA_BAR = -float(np.euler_gamma)
SIGMA2 = math.pi**2 / 6.0


@dataclass(frozen=True)
class GphFit:
    d_hat: float
    m: int
    s_m2: float
    nu: np.ndarray
    taper_order: int
    n: int

    def csv_row(self) -> dict:
        return {"n": self.n, "m": self.m, "r": self.taper_order, "d_hat": repr(float(self.d_hat))}


def regression_indices(m: int, r: int) -> np.ndarray:
    """Fourier indices ``(r + 1) k + 1``, ``k = 1..m``: one frequency every ``r + 1`` bins."""
    return (r + 1) * np.arange(1, m + 1) + 1


def check_bandwidth(n: int, m: int, r: int) -> None:
    nt = n_tilde(n, r)
    if m < 2 or (r + 1) * (m + 1) >= nt:
        raise ValueError(
            f"bandwidth m={m} invalid for n={n}, r={r}: need m >= 2 and "
            f"(r+1)(m+1) < n_tilde = {nt}, i.e. m <= {max(nt - 1, 0) // (r + 1) - 1}"
        )


def regressors(n: int, m: int, r: int = 1) -> tuple[np.ndarray, float]:
    """Centered regressors ``nu_k`` and ``s_m^2 = sum nu_k^2``."""
    check_bandwidth(n, m, r)
    lam = fourier_frequencies(n, regression_indices(m, r))
    x = np.log(np.abs(2.0 * np.sin(lam / 2.0)))
    nu = -2.0 * (x - x.mean())
    return nu, float(nu @ nu)


def estimate_from_periodogram(I: np.ndarray, n: int, m: int, r: int = 1) -> GphFit:
    """GPH fit from periodogram ordinates ``I[k - 1] = I_{r,n,k}``."""
    nu, s2 = regressors(n, m, r)
    used = np.asarray(I, dtype=float)[regression_indices(m, r) - 1]
    if np.any(used <= 0):
        raise DegenerateDataError("zero periodogram ordinate at a regression frequency")
    return GphFit(float(nu @ np.log(used)) / s2, m, s2, nu, r, n)


def estimate(x, m: int, r: int = 1) -> GphFit:
    """Least-squares slope of ``log I_{r,n,(r+1)k+1}`` on ``-2 log|2 sin(lambda/2)|``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    check_bandwidth(n, m, r)
    return estimate_from_periodogram(tapered_dft_all(x, r).periodogram, n, m, r)


def bandwidth_weights(n: int, grid, r: int = 1) -> np.ndarray:
    """Matrix ``W`` with ``d_hat(m) = W[i] @ log I[idx]`` for every ``m = grid[i]``.

    Columns index regression frequencies ``k = 1..max(grid)``.
    """
    grid = [int(m) for m in grid]
    W = np.zeros((len(grid), max(grid)))
    for i, m in enumerate(grid):
        nu, s2 = regressors(n, m, r)
        W[i, :m] = nu / s2
    return W


def mse_decomposition(fit: GphFit, spec: FarimaSpec) -> tuple[float, float]:
    """Split ``d_hat - d`` into the stochastic part ``W_m`` and the bias ``b_m``.

    ``b_m = s_m^{-2} sum nu_k log(f*(lambda_k) / f*(0))`` with ``f*`` the short-memory
    factor of the true spectral density; ``W_m = d_hat - d - b_m``.
    """
    lam = fourier_frequencies(fit.n, regression_indices(fit.m, fit.taper_order))
    L = np.log(short_memory_density(spec, lam) / short_memory_density(spec, 0.0))
    b = float(fit.nu @ L) / fit.s_m2
    return (fit.d_hat - spec.d) - b, b
