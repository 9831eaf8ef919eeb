"""Weighted non-linear periodogram functionals and the plug-in estimator of Lambda(f)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DegenerateDataError, SingularityError
from .filtermodel import FarimaSpec, spectral_density
from .spectral import fourier_frequencies, n_tilde, tapered_dft_all

__all__ = [
    "LaplacePair",
    "IDENTITY_PAIR",
    "LOG_PAIR",
    "laplace_transform",
    "weighted_functional",
    "plugin_lambda",
    "reference_lambda",
]

LAPLACE_CHECK_POINTS = (0.5, 1.0, 2.0)
LAPLACE_RTOL = 1e-6


def laplace_transform(H: Callable[[float], float], x: float) -> float:
    """``int_0^inf H(x v) e^{-v} dv`` by adaptive quadrature."""
    val, _ = integrate.quad(lambda v: H(x * v) * math.exp(-v), 0.0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
    return val


@dataclass(frozen=True)
class LaplacePair:
    """Functions with ``int_0^inf H(x v) e^{-v} dv = G(x)``, so that ``E H(f E) = G(f)``
    for a unit exponential ``E``. The identity is checked at construction."""

    G: Callable
    H: Callable
    name: str = "custom"
    verify: bool = True

    def __post_init__(self):
        if not self.verify:
            return
        for x in LAPLACE_CHECK_POINTS:
            lhs = laplace_transform(self.H, x)
            rhs = float(self.G(x))
            if abs(lhs - rhs) > LAPLACE_RTOL * max(1.0, abs(rhs)):
                raise ValueError(
                    f"pair {self.name!r} fails the Laplace identity at x={x}: {lhs!r} != {rhs!r}"
                )


def _identity(x):
    return x


def _log_corrected(y):
    return np.log(y) + np.euler_gamma


IDENTITY_PAIR = LaplacePair(_identity, _identity, "identity")
LOG_PAIR = LaplacePair(np.log, _log_corrected, "log")


def weighted_functional(I, f, beta, phi: Callable) -> float:
    """``sum_k beta_k phi(I_k / f_k)``."""
    I = np.asarray(I, dtype=float)
    f = np.asarray(f, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if not (I.shape == f.shape == beta.shape):
        raise ValueError("periodogram, spectral values and weights must have equal length")
    if np.any(f <= 0):
        raise ValueError("spectral values must be positive")
    return float(beta @ phi(I / f))


def _weights(w, lam: np.ndarray) -> np.ndarray:
    if w is None:
        return np.ones_like(lam)
    return np.broadcast_to(np.asarray(w(lam), dtype=float), lam.shape)


def plugin_lambda(x, pair: LaplacePair, w: Callable | None = None) -> float:
    """``(pi / n_tilde) sum_k w(lambda_k) H(I_{n,k})`` on the untapered periodogram."""
    dft = tapered_dft_all(x, 0)
    lam = dft.frequencies
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.asarray(pair.H(dft.periodogram), dtype=float)
    if not np.all(np.isfinite(h)):
        raise DegenerateDataError(f"H of pair {pair.name!r} is undefined at a periodogram ordinate")
    return float(math.pi / lam.size * (_weights(w, lam) @ h))


def reference_lambda(spec: FarimaSpec, pair: LaplacePair, w: Callable | None = None, n: int = 1024) -> float:
    """Riemann-sum target ``(pi / n_tilde) sum_k w(lambda_k) G(f(lambda_k))``."""
    nt = n_tilde(n, 0)
    lam = fourier_frequencies(n, np.arange(1, nt + 1))
    f = np.asarray(spectral_density(spec, lam), dtype=float)
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise SingularityError("spectral density is singular at a grid frequency")
    return float(math.pi / nt * (_weights(w, lam) @ np.asarray(pair.G(f), dtype=float)))
