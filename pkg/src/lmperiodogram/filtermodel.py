"""Linear-process model: FARIMA filters, innovation laws and second-order structure.

The process is ``X_t = sum_j psi_j Z_{t-j}`` with ``psi`` the impulse response of
``(1 - B)^{-d} theta(B) / phi(B)`` and ``Z`` i.i.d. with mean 0 and variance 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import ModelError, SingularityError

__all__ = [
    "FarimaSpec",
    "InnovationKind",
    "InnovationSpec",
    "SmoothnessClass",
    "ma_coefficients",
    "arma_coefficients",
    "transfer_function",
    "spectral_density",
    "short_memory_density",
    "autocovariance",
    "fractional_autocovariance",
]

# Unit root tolerance for the AR polynomial.
AR_ROOT_MARGIN = 1e-8
# Default truncation lengths (simulation / oracle).
SIM_TRUNCATION = 5000
ORACLE_TRUNCATION = 10**6
# Geometric ARMA tails are cut once below this absolute size.
ARMA_TAIL_TOL = 1e-17
ARMA_MAX_LENGTH = 200_000


@dataclass(frozen=True)
class FarimaSpec:
    """FARIMA(p, d, q) filter ``phi(B) (1 - B)^d X_t = theta(B) Z_t``.

    ``ar`` holds ``phi_1..phi_p`` with ``phi(z) = 1 - sum phi_i z^i`` and ``ma``
    holds ``theta_1..theta_q`` with ``theta(z) = 1 + sum theta_j z^j``.
    """

    d: float = 0.0
    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(a) for a in self.ar))
        object.__setattr__(self, "ma", tuple(float(b) for b in self.ma))
        object.__setattr__(self, "d", float(self.d))
        if not math.isfinite(self.d) or abs(self.d) >= 0.5:
            raise ModelError(f"memory parameter must satisfy |d| < 1/2, got d={self.d}")
        if self.ar:
            # numpy.roots wants the highest degree first: -phi_p z^p ... - phi_1 z + 1
            poly = np.r_[-np.asarray(self.ar)[::-1], 1.0]
            poly = np.trim_zeros(poly, "f")
            roots = np.roots(poly)
            if roots.size and np.min(np.abs(roots)) <= 1.0 + AR_ROOT_MARGIN:
                raise ModelError(
                    "AR polynomial has a root inside or on the unit circle "
                    f"(min modulus {np.min(np.abs(roots)):.6g}); the process is not stationary"
                )

    @property
    def is_fractional_noise(self) -> bool:
        return not self.ar and not self.ma

    @property
    def ar_poly(self) -> np.ndarray:
        return np.r_[1.0, -np.asarray(self.ar, dtype=float)]

    @property
    def ma_poly(self) -> np.ndarray:
        return np.r_[1.0, np.asarray(self.ma, dtype=float)]


class InnovationKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    SHIFTED_PARETO = "pareto"
    CENTERED_EXPONENTIAL = "exponential"


# Law of the unstandardized shifted Pareto: P(Z <= u) = 1 - (u + 7/6)^(-7), u >= -7/6.
PARETO_INDEX = 7.0
PARETO_SHIFT = 7.0 / 6.0
PARETO_VARIANCE = 7.0 / 180.0


def _pareto_cumulants(max_order: int) -> dict[int, float]:
    # Y = Z + 7/6 is Pareto(1, 7) with E Y^k = 7 / (7 - k).
    alpha = PARETO_INDEX
    raw = [alpha / (alpha - k) for k in range(max_order + 1)]
    mean = raw[1]
    central = [
        sum(math.comb(k, i) * raw[i] * (-mean) ** (k - i) for i in range(k + 1))
        for k in range(max_order + 1)
    ]
    sd = math.sqrt(central[2])
    mu = [c / sd**k for k, c in enumerate(central)]
    cums = {3: mu[3], 4: mu[4] - 3.0}
    if max_order >= 5:
        cums[5] = mu[5] - 10.0 * mu[3]
    return cums


_CUMULANTS: dict[InnovationKind, dict[int, float]] = {
    InnovationKind.GAUSSIAN: {3: 0.0, 4: 0.0, 5: 0.0},
    # Laplace with scale 1/sqrt(2): kappa_4 = 12 b^4 = 3, odd cumulants vanish.
    InnovationKind.LAPLACE: {3: 0.0, 4: 3.0, 5: 0.0},
    # Exp(1) - 1: kappa_r = (r - 1)!
    InnovationKind.CENTERED_EXPONENTIAL: {3: 2.0, 4: 6.0, 5: 24.0},
    InnovationKind.SHIFTED_PARETO: _pareto_cumulants(5),
}


@dataclass(frozen=True)
class InnovationSpec:
    """Standardized (mean 0, variance 1) innovation law."""

    kind: InnovationKind = InnovationKind.GAUSSIAN
    cumulants: dict[int, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = InnovationKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "cumulants", dict(_CUMULANTS[kind]))

    @classmethod
    def parse(cls, name: str) -> "InnovationSpec":
        aliases = {
            "gaussian": "gaussian", "normal": "gaussian", "a": "gaussian",
            "laplace": "laplace", "laplacian": "laplace", "b": "laplace",
            "pareto": "pareto", "shifted_pareto": "pareto", "c": "pareto",
            "exponential": "exponential", "centered_exponential": "exponential",
        }
        key = name.strip().lower()
        if key not in aliases:
            raise ValueError(f"unknown innovation kind {name!r}")
        return cls(InnovationKind(aliases[key]))

    def cumulant(self, order: int) -> float:
        if order == 1:
            return 0.0
        if order == 2:
            return 1.0
        try:
            return self.cumulants[order]
        except KeyError:
            raise ValueError(f"cumulant of order {order} not available for {self.kind.value}") from None

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class SmoothnessClass:
    """Parameters of the long-memory filter classes F, F_local and F_global."""

    theta: float
    beta: float
    delta: float
    Delta: float
    mu: float

    def __post_init__(self):
        if not 0.0 < self.theta <= math.pi:
            raise ValueError("theta must lie in (0, pi]")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        if self.Delta > self.delta:
            raise ValueError("Delta must not exceed delta")
        if self.mu <= 0:
            raise ValueError("mu must be positive")

    def contains_memory(self, d: float) -> bool:
        return self.Delta <= d <= self.delta


def _fractional_coefficients(d: float, truncation: int) -> np.ndarray:
    # psi_t = psi_{t-1} (t - 1 + d) / t, psi_0 = 1
    t = np.arange(1, truncation, dtype=float)
    return np.r_[1.0, np.cumprod((t - 1.0 + d) / t)]


def arma_coefficients(spec: FarimaSpec, length: int) -> np.ndarray:
    """First ``length`` coefficients of ``theta(B) / phi(B)``."""
    impulse = np.zeros(length)
    impulse[0] = 1.0
    return signal.lfilter(spec.ma_poly, spec.ar_poly, impulse)


def ma_coefficients(spec: FarimaSpec, truncation: int = SIM_TRUNCATION) -> np.ndarray:
    """Impulse response ``psi_0..psi_{T-1}`` of the FARIMA filter.

    The fractional part uses the multiplicative recursion (no Gamma function);
    the ARMA part is applied as a recursive filter, which is the exact truncated
    convolution with the ``theta / phi`` expansion.
    """
    truncation = int(truncation)
    if truncation < 1:
        raise ValueError("truncation must be a positive integer")
    frac = _fractional_coefficients(spec.d, truncation)
    if spec.is_fractional_noise:
        return frac
    return signal.lfilter(spec.ma_poly, spec.ar_poly, frac)


def transfer_function(spec: FarimaSpec, lam) -> np.ndarray:
    """``(1 - e^{-i lam})^{-d} theta(e^{-i lam}) / phi(e^{-i lam})``."""
    lam = np.asarray(lam, dtype=float)
    z = np.exp(-1j * lam)
    arma = np.polynomial.polynomial.polyval(z, spec.ma_poly) / np.polynomial.polynomial.polyval(
        z, spec.ar_poly
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        return (1.0 - z) ** (-spec.d) * arma


def short_memory_density(spec: FarimaSpec, lam) -> np.ndarray:
    """``f*(lam) = |1 - e^{-i lam}|^{2d} f(lam)``, finite and positive at zero."""
    lam = np.asarray(lam, dtype=float)
    z = np.exp(-1j * lam)
    ratio = np.polynomial.polynomial.polyval(z, spec.ma_poly) / np.polynomial.polynomial.polyval(
        z, spec.ar_poly
    )
    return np.abs(ratio) ** 2 / (2.0 * np.pi)


def spectral_density(spec: FarimaSpec, lam) -> np.ndarray | float:
    """``f(lam) = (2 pi)^{-1} |psi(lam)|^2``."""
    lam_arr = np.asarray(lam, dtype=float)
    if spec.d > 0 and np.any(np.mod(lam_arr, 2 * np.pi) == 0):
        raise SingularityError("spectral density is infinite at frequency 0 when d > 0")
    gain = np.abs(2.0 * np.sin(lam_arr / 2.0)) ** (-2.0 * spec.d) if spec.d != 0 else 1.0
    out = gain * short_memory_density(spec, lam_arr)
    return float(out) if np.ndim(out) == 0 else out


def fractional_autocovariance(d: float, max_lag: int) -> np.ndarray:
    """Autocovariance of ``(1 - B)^{-d} Z`` at lags ``0..max_lag``."""
    if abs(d) >= 0.5:
        raise ModelError("|d| must be < 1/2")
    # gamma(0) = Gamma(1 - 2d) / Gamma(1 - d)^2, gamma(h) = gamma(h-1) (h - 1 + d) / (h - d)
    g0 = math.exp(math.lgamma(1.0 - 2.0 * d) - 2.0 * math.lgamma(1.0 - d))
    h = np.arange(1, max_lag + 1, dtype=float)
    return g0 * np.r_[1.0, np.cumprod((h - 1.0 + d) / (h - d))]


def _arma_length(spec: FarimaSpec) -> int:
    if not spec.ar:
        return len(spec.ma) + 1
    # Decay rate of the AR(p) expansion is the reciprocal of the smallest root modulus.
    poly = np.trim_zeros(np.r_[-np.asarray(spec.ar)[::-1], 1.0], "f")
    rho = 1.0 / np.min(np.abs(np.roots(poly)))
    n = int(np.ceil(np.log(ARMA_TAIL_TOL) / np.log(rho))) + 50 + len(spec.ma)
    return min(max(n, 64), ARMA_MAX_LENGTH)


def autocovariance(spec: FarimaSpec, max_lag: int) -> np.ndarray:
    """Autocovariances ``gamma(0..max_lag)`` of the FARIMA process.

    Fractional noise uses the closed form through its ratio recursion. With an
    ARMA part, ``X = a(B) Y`` where ``Y`` is fractional noise and ``a`` the
    geometric ``theta / phi`` expansion, so ``gamma_X(h) = sum_k c_k gamma_Y(h - k)``
    with ``c`` the autocorrelation sequence of ``a``.
    """
    max_lag = int(max_lag)
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    if spec.is_fractional_noise:
        return fractional_autocovariance(spec.d, max_lag)
    a = arma_coefficients(spec, _arma_length(spec))
    L = a.size
    c = np.correlate(a, a, mode="full")  # lags -(L-1)..(L-1)
    gy = fractional_autocovariance(spec.d, max_lag + L)
    lags = np.arange(-(L - 1), max_lag + L)
    gy_two_sided = gy[np.abs(lags)]
    # gamma_X(h) = sum_{k} c[k] gamma_Y(h - k); a full convolution lines up h = 0..max_lag
    full = signal.fftconvolve(gy_two_sided, c[::-1], mode="valid") if L > 64 else np.convolve(
        gy_two_sided, c[::-1], mode="valid"
    )
    return full[: max_lag + 1]
