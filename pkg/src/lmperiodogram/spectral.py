"""Tapered DFT, periodogram, taper kernel and DFT covariance structure.

Conventions: ``lambda_k = 2 pi k / n``, the DFT sums ``X_t e^{i t lambda}`` over
``t = 1..n`` and the order-``r`` taper is ``h_t^r`` with ``h_t = 1 - e^{2 i pi t / n}``.
Valid frequency indices are ``1..n_tilde`` with ``n_tilde = (n - 2r - 1) // 2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from .errors import ResourceError, SingularityError
from .filtermodel import FarimaSpec, autocovariance, spectral_density

__all__ = [
    "TaperedDft",
    "n_tilde",
    "taper_norm",
    "fourier_frequencies",
    "tapered_dft_all",
    "dirichlet_kernel",
    "kernel_value",
    "sigma_r",
    "asymptotic_cov",
    "validate_frequencies",
    "DftCovariance",
    "exact_dft_cov_matrix",
    "exact_dft_cov",
    "EXACT_COV_MAX_N",
]

# Dense Toeplitz quadratic forms above this size are refused.
EXACT_COV_MAX_N = 8192


def n_tilde(n: int, r: int = 0) -> int:
    return (int(n) - 2 * int(r) - 1) // 2


def taper_norm(r: int) -> int:
    """``a_r = n^{-1} sum_t |h_t|^{2r} = binom(2r, r)``."""
    return math.comb(2 * r, r)


def fourier_frequencies(n: int, k) -> np.ndarray:
    return 2.0 * np.pi * np.asarray(k, dtype=float) / n


def _binomial_weights(r: int) -> np.ndarray:
    return np.array([math.comb(r, s) * (-1) ** s for s in range(r + 1)], dtype=float)


@dataclass(frozen=True)
class TaperedDft:
    """Tapered DFT coefficients ``d_{r,n,k}``, ``k = 1..n_tilde``."""

    order: int
    n: int
    coeffs: np.ndarray

    @property
    def n_tilde(self) -> int:
        return n_tilde(self.n, self.order)

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.coeffs.shape[-1] + 1)

    @property
    def frequencies(self) -> np.ndarray:
        return fourier_frequencies(self.n, self.k)

    @cached_property
    def periodogram(self) -> np.ndarray:
        return self.coeffs.real**2 + self.coeffs.imag**2

    def normalized(self, spec: FarimaSpec) -> np.ndarray:
        """``omega_k = sqrt(2 pi) d_k / |psi(lambda_k)| = d_k / sqrt(f(lambda_k))``."""
        f = spectral_density(spec, self.frequencies)
        if np.any(f <= 0):
            raise SingularityError("spectral density vanishes at a Fourier frequency")
        return self.coeffs / np.sqrt(f)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "lambda_k", "I_rk"])
            for k, lam, val in zip(self.k, self.frequencies, self.periodogram):
                w.writerow([int(k), repr(float(lam)), repr(float(val))])


def _raw_dft(x: np.ndarray) -> np.ndarray:
    """``F(k) = sum_{t=1}^n X_t e^{i t lambda_k}`` for ``k = 0..n-1`` (along the last axis)."""
    n = x.shape[-1]
    k = np.arange(n)
    return np.exp(2j * np.pi * k / n) * np.fft.ifft(x, axis=-1) * n


def tapered_dft_all(x, r: int = 0) -> TaperedDft:
    """Tapered DFT of order ``r`` at all valid Fourier frequencies.

    One FFT of the untapered series is shared by every taper order: the taper
    expands binomially into ``r + 1`` shifted untapered bins,
    ``d_{r,k} = a_r^{-1/2} sum_s binom(r, s) (-1)^s d_{0,k+s}``.
    Leading axes of ``x`` are treated as independent series.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    r = int(r)
    if r < 0:
        raise ValueError("taper order must be nonnegative")
    m = n_tilde(n, r)
    if m < 1:
        raise ValueError(f"tapered DFT of order {r} needs n >= 2r + 3 = {2 * r + 3}, got n={n}")
    raw = _raw_dft(x)
    acc = np.zeros(x.shape[:-1] + (m,), dtype=complex)
    for s, w in enumerate(_binomial_weights(r)):
        acc += w * raw[..., 1 + s : 1 + s + m]
    return TaperedDft(order=r, n=n, coeffs=acc / math.sqrt(2.0 * np.pi * n * taper_norm(r)))


def _geometric_sum(mu, n: int) -> np.ndarray:
    """``sum_{t=1}^n e^{i t mu}`` in closed form."""
    mu = np.asarray(mu, dtype=float)
    half = mu / 2.0
    s = np.sin(half)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sin(n * half) / s
    # at multiples of 2 pi the sum is exactly n
    on_grid = np.abs(s) < 1e-14
    out = np.exp(1j * (n + 1) * half) * np.where(on_grid, 1.0, ratio)
    return np.where(on_grid, complex(n), out)


def dirichlet_kernel(lam, n: int) -> np.ndarray:
    """Non-symmetric Dirichlet kernel ``D_n(lam) = sum_{t=1}^n e^{-i lam t}``."""
    return np.conj(_geometric_sum(lam, n))


def kernel_value(r: int, n: int, lam) -> np.ndarray:
    """Normalized taper kernel ``D_{r,n}(lam) = (n a_r)^{-1/2} sum_t h_t^r e^{i t lam}``."""
    lam = np.asarray(lam, dtype=float)
    acc = np.zeros(lam.shape, dtype=complex)
    for s, w in enumerate(_binomial_weights(r)):
        acc += w * _geometric_sum(lam + 2.0 * np.pi * s / n, n)
    out = acc / math.sqrt(n * taper_norm(r))
    return out[()] if out.ndim == 0 else out


def sigma_r(r: int, l: int) -> float:
    """Asymptotic covariance of normalized tapered DFT ordinates ``l`` bins apart."""
    l = int(l)
    if abs(l) > r:
        return 0.0
    return (-1) ** abs(l) * math.comb(2 * r, r + l) / taper_norm(r)


def validate_frequencies(k, upper: int | None = None) -> tuple[int, ...]:
    k = tuple(int(v) for v in np.atleast_1d(k))
    if not k:
        raise ValueError("frequency tuple must be nonempty")
    if any(b <= a for a, b in zip(k, k[1:])):
        raise ValueError("frequency indices must be strictly increasing")
    if k[0] < 1 or (upper is not None and k[-1] > upper):
        raise ValueError(f"frequency indices must lie in 1..{upper}")
    return k


def asymptotic_cov(k, r: int) -> np.ndarray:
    """Limit covariance ``V(k)`` of the stacked (Re, Im) normalized DFT vector."""
    k = validate_frequencies(k)
    u = len(k)
    V = np.zeros((2 * u, 2 * u))
    for i in range(u):
        for j in range(u):
            v = 0.5 * sigma_r(r, k[i] - k[j])
            V[2 * i, 2 * j] = V[2 * i + 1, 2 * j + 1] = v
    return V


@dataclass(frozen=True)
class DftCovariance:
    """Exact second moments of normalized tapered DFT ordinates.

    ``herm[a, b] = E[omega_{k_a} conj(omega_{k_b})]`` and
    ``pseudo[a, b] = E[omega_{k_a} omega_{k_b}]``. ``tail_bound`` bounds the effect of
    autocovariances dropped beyond ``max_lag``.
    """

    k: tuple[int, ...]
    n: int
    r: int
    herm: np.ndarray
    pseudo: np.ndarray
    max_lag: int
    tail_bound: float


def exact_dft_cov_matrix(
    spec: FarimaSpec, n: int, r: int, k, *, max_lag: int | None = None, gamma: np.ndarray | None = None
) -> DftCovariance:
    """Exact finite-``n`` covariances of ``omega_{r,n,k}`` over a set of frequencies.

    Evaluates ``(2 pi n a_r)^{-1} a_k^T Gamma conj(a_j)`` with ``Gamma`` the Toeplitz
    autocovariance matrix and ``a_k(t) = h_t^r e^{i t lambda_k}``, normalized by
    ``sqrt(f(lambda_k) f(lambda_j))``.
    """
    n, r = int(n), int(r)
    if n > EXACT_COV_MAX_N:
        raise ResourceError(f"exact DFT covariance limited to n <= {EXACT_COV_MAX_N}, got {n}")
    k = validate_frequencies(k, n_tilde(n, r))
    max_lag = n - 1 if max_lag is None else min(int(max_lag), n - 1)
    if gamma is None:
        gamma = autocovariance(spec, n - 1)
    gamma = np.asarray(gamma, dtype=float)[:n].copy()
    tail = 0.0
    if max_lag < n - 1:
        tail = float(np.sum(np.abs(gamma[max_lag + 1 :]))) * 2.0
        gamma[max_lag + 1 :] = 0.0
    t = np.arange(1, n + 1)
    lam = fourier_frequencies(n, k)
    taper = (1.0 - np.exp(2j * np.pi * t / n)) ** r
    A = taper[:, None] * np.exp(1j * np.outer(t, lam))
    G = linalg.toeplitz(gamma)
    GA = G @ A
    scale = 1.0 / (2.0 * np.pi * n * taper_norm(r))
    herm = scale * (A.T @ np.conj(GA))
    pseudo = scale * (A.T @ GA)
    f = np.asarray(spectral_density(spec, lam), dtype=float)
    norm = np.sqrt(np.outer(f, f))
    # |a_k(t)| <= 2^r, so each dropped lag moves an entry by at most n 4^r |gamma(h)| scale
    tail_bound = tail * scale * n * 4**r / float(np.min(f))
    return DftCovariance(k, n, r, herm / norm, pseudo / norm, max_lag, tail_bound)


def exact_dft_cov(spec: FarimaSpec, n: int, r: int, k: int, j: int, **kwargs) -> tuple[complex, complex]:
    """``(E[omega_k conj(omega_j)], E[omega_k omega_j])`` for one pair of frequencies."""
    if k == j:
        cov = exact_dft_cov_matrix(spec, n, r, (k,), **kwargs)
        return complex(cov.herm[0, 0]), complex(cov.pseudo[0, 0])
    lo, hi = sorted((k, j))
    cov = exact_dft_cov_matrix(spec, n, r, (lo, hi), **kwargs)
    a, b = (0, 1) if k < j else (1, 0)
    return complex(cov.herm[a, b]), complex(cov.pseudo[a, b])
