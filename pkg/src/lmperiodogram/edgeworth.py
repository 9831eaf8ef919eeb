"""Edgeworth expansions for the normalized DFT vector of a linear process.

``S_n(k)`` stacks ``(Re omega_{k_i}, Im omega_{k_i})`` and equals ``sum_j U_{n,j} Z_j``.
Its cumulants are ``chi_nu = kappa_{|nu|} sum_j U_{n,j}^nu``, and the expansion is

    q_n(x) ~ phi_V(x) + sum_{r=1}^{s-3} [P~_r(-D)] phi_V(x)

where the ``P~_r`` come from ``exp(sum_{r>=3} chi_r(z) t^{r-2} / r!)``. Gaussian
derivatives are handled exactly through ``D^nu phi_V = h_nu phi_V`` with the
multivariate Hermite recursion
``h_{nu+e_i} = -y_i h_nu - sum_l Lambda_il nu_l h_{nu-e_l}``, ``y = Lambda x``, ``Lambda = V^{-1}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import signal, special, stats

from .errors import NumericalDegeneracyError, SingularityError
from .filtermodel import FarimaSpec, InnovationSpec, ma_coefficients, spectral_density
from .spectral import fourier_frequencies, taper_norm, validate_frequencies

__all__ = [
    "CoefficientArray",
    "CumulantTensor",
    "EdgeworthExpansion",
    "DecorrelationParams",
    "multi_indices",
    "coefficient_vectors",
    "cumulant_tensor",
    "expansion_polynomials",
    "hermite_factors",
    "gaussian_density",
    "edgeworth_density",
    "moment_expectation",
    "decorrelation_bound",
    "hermite_rank",
    "expansion_diagnostics",
    "DIAGNOSTIC_COLUMNS",
]

MAX_DIM = 4
MAX_ORDER = 5
MIN_EIGENVALUE = 1e-8
HERMITE_RANK_THRESHOLD = 1e-6
DIAGNOSTIC_COLUMNS = ["n", "k", "order", "tensor_max", "trace_Vn", "lambda_min", "lambda_max"]

MultiIndex = tuple[int, ...]
Polynomial = dict[MultiIndex, float]


def multi_indices(dim: int, order: int):
    """All ``nu`` in ``N^dim`` with ``|nu| = order``, in lexicographic order."""
    for cut in itertools.combinations(range(order + dim - 1), dim - 1):
        bounds = (-1,) + cut + (order + dim - 1,)
        yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(dim))


def _factorial(nu: MultiIndex) -> int:
    return math.prod(math.factorial(v) for v in nu)


# ---------------------------------------------------------------------------
# coefficient arrays and cumulants


@dataclass(frozen=True)
class CoefficientArray:
    """Vectors ``U_{n,j}(k)`` for ``j`` in ``js``; rows of ``U`` are indexed like ``js``."""

    js: np.ndarray
    U: np.ndarray
    n: int
    r: int
    k: tuple[int, ...]
    tail_mass: float = 0.0

    @property
    def dim(self) -> int:
        return self.U.shape[1]

    @property
    def u(self) -> int:
        return self.dim // 2

    @property
    def covariance(self) -> np.ndarray:
        """``V_n = sum_j U_j U_j'``."""
        return self.U.T @ self.U


def _tail_estimate(norms2: np.ndarray, js: np.ndarray) -> float:
    # Power-law extrapolation of ||U_j||^2 over the outer half of the negative window.
    neg = js < 0
    if neg.sum() < 16:
        return 0.0
    jj = -js[neg].astype(float)
    vv = norms2[neg]
    far = (jj >= jj.max() / 2) & (vv > 0)
    if far.sum() < 8:
        return 0.0
    slope, icpt = np.polyfit(np.log(jj[far]), np.log(vv[far]), 1)
    if slope >= -1.0:
        return float("inf")
    J = jj.max()
    return float(math.exp(icpt) * J ** (slope + 1.0) / (-slope - 1.0))


def coefficient_vectors(spec: FarimaSpec, n: int, r: int, k, support: int | None = None) -> CoefficientArray:
    """``U_{n,j}(k) = (n a_r)^{-1/2} F_n^{-1}(k) sum_{t=1}^n psi_{t-j} C_{n,t}(k)`` for ``-J <= j <= n``.

    The filter is causal, so ``U_{n,j} = 0`` for ``j > n``; ``J`` defaults to ``4n``.
    """
    n, r = int(n), int(r)
    k = validate_frequencies(k)
    J = 4 * n if support is None else int(support)
    if J < n:
        raise ValueError("support window J must be at least n")
    lam_k = fourier_frequencies(n, k)
    f = np.asarray(spectral_density(spec, lam_k), dtype=float)
    if np.any(~np.isfinite(f)) or np.any(f <= 0):
        raise SingularityError("spectral density is zero or singular at a requested frequency")
    abspsi = np.sqrt(2.0 * np.pi * f)
    t = np.arange(1, n + 1)
    C = np.zeros((n, 2 * len(k)))
    for p in range(r + 1):
        w = (-1) ** p * math.comb(r, p)
        ang = np.outer(t, fourier_frequencies(n, np.asarray(k) + p))
        C[:, 0::2] += w * np.cos(ang)
        C[:, 1::2] += w * np.sin(ang)
    C /= np.repeat(abspsi, 2)[None, :] * math.sqrt(n * taper_norm(r))
    psi = ma_coefficients(spec, n + J + 1)
    nz = np.trim_zeros(psi, "b")
    # sum_t C(t) psi(t - j) = (C reversed * psi)[n - j]
    U = np.zeros((n + J + 1, C.shape[1]))
    for c in range(C.shape[1]):
        conv = signal.fftconvolve(C[::-1, c], nz) if nz.size > 1 else C[::-1, c] * nz[0]
        m = min(conv.size, n + J + 1)
        U[:m, c] = conv[:m]
    js = n - np.arange(n + J + 1)
    order = np.argsort(js)
    js, U = js[order], U[order]
    tail = _tail_estimate(np.sum(U**2, axis=1), js) if spec.d != 0 or spec.ar or spec.ma else 0.0
    return CoefficientArray(js, U, n, r, k, tail)


@dataclass(frozen=True)
class CumulantTensor:
    order: int
    entries: dict[MultiIndex, float]

    @property
    def max_abs(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0.0)

    def __getitem__(self, nu: MultiIndex) -> float:
        return self.entries.get(tuple(nu), 0.0)


def cumulant_tensor(coeffs: CoefficientArray, innov: InnovationSpec, order: int) -> CumulantTensor:
    """``chi_nu = kappa_order sum_j U_j^nu`` over every ``|nu| = order``."""
    if not 3 <= order <= MAX_ORDER:
        raise ValueError(f"cumulant order must lie in 3..{MAX_ORDER}")
    kappa = innov.cumulant(order)
    entries = {}
    for nu in multi_indices(coeffs.dim, order):
        entries[nu] = 0.0 if kappa == 0 else kappa * float(np.sum(np.prod(coeffs.U**np.asarray(nu), axis=1)))
    return CumulantTensor(order, entries)


# ---------------------------------------------------------------------------
# polynomials and Gaussian derivatives


def _poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    out: Polynomial = {}
    for na, ca in a.items():
        for nb, cb in b.items():
            key = tuple(x + y for x, y in zip(na, nb))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def _scaled_chi(tensor: CumulantTensor) -> Polynomial:
    # chi_r(z) / r! = sum_{|nu|=r} chi_nu z^nu / nu!
    return {nu: v / _factorial(nu) for nu, v in tensor.entries.items() if v != 0.0}


def expansion_polynomials(tensors, max_r: int = 1) -> list[Polynomial]:
    """Coefficient maps of ``P~_1`` (and ``P~_2`` when ``max_r = 2``).

    ``P~_1 = chi_3(z) / 6`` and ``P~_2 = chi_4(z) / 24 + chi_3(z)^2 / 72``.
    ``tensors`` maps order to :class:`CumulantTensor` (a list is accepted too).
    """
    if not isinstance(tensors, Mapping):
        tensors = {t.order: t for t in tensors}
    if max_r not in (1, 2):
        raise ValueError("max_r must be 1 or 2")
    needed = [3] if max_r == 1 else [3, 4]
    missing = [o for o in needed if o not in tensors]
    if missing:
        raise ValueError(f"missing cumulant tensors of order {missing}")
    a3 = _scaled_chi(tensors[3])
    polys = [a3]
    if max_r == 2:
        p2 = dict(_scaled_chi(tensors[4]))
        for nu, c in _poly_mul(a3, a3).items():
            p2[nu] = p2.get(nu, 0.0) + 0.5 * c
        polys.append(p2)
    return polys


def hermite_factors(x: np.ndarray, V: np.ndarray, indices) -> dict[MultiIndex, np.ndarray]:
    """``h_nu(x)`` with ``D^nu phi_V = h_nu phi_V`` for every requested ``nu`` (and its ancestors)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    dim = x.shape[1]
    Lam = np.linalg.inv(V)
    y = x @ Lam
    zero = (0,) * dim
    h: dict[MultiIndex, np.ndarray] = {zero: np.ones(x.shape[0])}
    top = max((sum(nu) for nu in indices), default=0)
    for deg in range(top):
        for nu in multi_indices(dim, deg + 1):
            i = next(a for a, v in enumerate(nu) if v > 0)
            mu = tuple(v - (a == i) for a, v in enumerate(nu))
            val = -y[:, i] * h[mu]
            for l, ml in enumerate(mu):
                if ml:
                    down = tuple(v - (a == l) for a, v in enumerate(mu))
                    val = val - Lam[i, l] * ml * h[down]
            h[nu] = val
    return h


def gaussian_density(x, V) -> np.ndarray:
    V = np.atleast_2d(np.asarray(V, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return stats.multivariate_normal(mean=np.zeros(V.shape[0]), cov=V).pdf(x).reshape(x.shape[0])


@dataclass(frozen=True)
class EdgeworthExpansion:
    """Expansion of order ``s`` (terms ``P_1..P_{s-3}``) around ``phi_V``."""

    s: int
    V: np.ndarray
    tensors: dict[int, CumulantTensor]
    polynomials: list[Polynomial] = field(init=False, repr=False)

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.V, dtype=float))
        if not 3 <= self.s <= MAX_ORDER:
            raise ValueError(f"expansion order s must lie in 3..{MAX_ORDER}")
        if V.shape[0] > MAX_DIM or V.shape[0] != V.shape[1]:
            raise ValueError(f"covariance must be square of dimension <= {MAX_DIM}")
        if not np.allclose(V, V.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        lam_min = float(np.linalg.eigvalsh(V).min())
        if lam_min <= MIN_EIGENVALUE:
            raise NumericalDegeneracyError(f"covariance is near singular (smallest eigenvalue {lam_min:.3g})")
        object.__setattr__(self, "V", V)
        tensors = dict(self.tensors) if isinstance(self.tensors, Mapping) else {t.order: t for t in self.tensors}
        object.__setattr__(self, "tensors", tensors)
        polys = expansion_polynomials(tensors, self.s - 3) if self.s > 3 else []
        object.__setattr__(self, "polynomials", polys)

    @property
    def dim(self) -> int:
        return self.V.shape[0]

    @classmethod
    def from_coefficients(cls, coeffs: CoefficientArray, innov: InnovationSpec, s: int = 4) -> "EdgeworthExpansion":
        tensors = {o: cumulant_tensor(coeffs, innov, o) for o in range(3, s)}
        return cls(s, coeffs.covariance, tensors)

    @classmethod
    def from_cumulants(cls, V, chi: Mapping[MultiIndex, float], s: int = 4) -> "EdgeworthExpansion":
        """Build from a flat ``{nu: chi_nu}`` map; absent entries are zero."""
        V = np.atleast_2d(np.asarray(V, dtype=float))
        dim = V.shape[0]
        tensors = {}
        for o in range(3, max(s, 4)):
            tensors[o] = CumulantTensor(o, {nu: float(chi.get(nu, 0.0)) for nu in multi_indices(dim, o)})
        return cls(s, V, tensors)

    def correction_terms(self, x) -> list[np.ndarray]:
        """``P_r(x) / phi_V(x)`` for ``r = 1..s-3``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        allnu = [nu for p in self.polynomials for nu in p]
        h = hermite_factors(x, self.V, allnu)
        out = []
        for p in self.polynomials:
            acc = np.zeros(x.shape[0])
            for nu, a in p.items():
                acc += a * (-1) ** sum(nu) * h[nu]
            out.append(acc)
        return out

    def weight(self, x) -> np.ndarray:
        """``1 + sum_r P_r / phi_V``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return 1.0 + sum(self.correction_terms(x), np.zeros(x.shape[0]))

    def density(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return gaussian_density(x, self.V) * self.weight(x)


def edgeworth_density(exp: EdgeworthExpansion, x) -> np.ndarray | float:
    x_arr = np.asarray(x, dtype=float)
    single = x_arr.ndim <= 1
    vals = exp.density(x_arr.reshape(1, -1) if single else x_arr)
    return float(vals[0]) if single else vals


# ---------------------------------------------------------------------------
# moments by randomized quasi-Monte Carlo


def _antithetic_normals(dim: int, count: int, seed) -> np.ndarray:
    m = max(1, math.ceil(math.log2(max(count, 2))))
    pts = stats.qmc.Sobol(d=dim, scramble=True, seed=seed).random_base2(m)
    eps = special.ndtri(pts)
    return np.concatenate([eps, -eps])


def moment_expectation(
    exp: EdgeworthExpansion,
    g: Callable[[np.ndarray], np.ndarray],
    samples: int = 2**16,
    *,
    replicates: int = 16,
    seed: int = 0,
) -> tuple[float, float]:
    """``int g (phi_V + sum P_r) dx`` by importance sampling under ``phi_V``.

    Each of ``replicates`` independently scrambled Sobol sets (antithetic pairs)
    gives an estimate with the weight ``1 + sum P_r / phi_V`` re-centred to unit
    sample mean, the exact value of its expectation. Returns the mean estimate
    and its standard error across replicates.
    """
    if samples < 10**4:
        raise ValueError("use at least 10^4 samples")
    per = max(2, samples // (2 * replicates))
    L = np.linalg.cholesky(exp.V)
    ss = np.random.SeedSequence(seed)
    ests = []
    for child in ss.spawn(replicates):
        x = _antithetic_normals(exp.dim, per, np.random.default_rng(child)) @ L.T
        w = exp.weight(x)
        w = w - w.mean() + 1.0
        gx = np.asarray(g(x), dtype=float).reshape(x.shape[0])
        ests.append(float(np.mean(gx * w)))
    ests = np.array(ests)
    return float(ests.mean()), float(ests.std(ddof=1) / math.sqrt(replicates))


# ---------------------------------------------------------------------------
# decorrelation bound and Hermite rank


@dataclass(frozen=True)
class DecorrelationParams:
    """``local``: frequencies confined near zero; ``global``: regularity over the whole band."""

    regime: str = "local"
    beta: float = 2.0

    def __post_init__(self):
        if self.regime not in ("local", "global"):
            raise ValueError("regime must be 'local' or 'global'")
        if not self.beta > 0:
            raise ValueError("beta must be positive")


def decorrelation_bound(k: int, j: int, n: int, params: DecorrelationParams) -> float:
    """``p(k, j, n, beta) = (jk)^{-1/2} [+ (j sqrt(k) / n)^beta in the local regime]``, ``k <= j``."""
    if not 1 <= k <= j:
        raise ValueError("need 1 <= k <= j")
    p = (j * k) ** -0.5
    if params.regime == "local":
        p += (j * math.sqrt(k) / n) ** params.beta
    return p


def _hermite_1d(eps: np.ndarray, degree: int) -> list[np.ndarray]:
    he = [np.ones_like(eps), eps.copy()]
    for q in range(1, degree):
        he.append(eps * he[q] - q * he[q - 1])
    return he[: degree + 1]


def hermite_rank(
    g: Callable[[np.ndarray], np.ndarray],
    cov,
    degree_cap: int = 4,
    *,
    samples: int = 10**6,
    seed: int = 0,
    threshold: float = HERMITE_RANK_THRESHOLD,
) -> int:
    """Smallest degree with a non-negligible Hermite projection of ``g - E g`` under ``N(0, cov)``.

    Projections use ``He_nu(eps)`` with ``x = L eps``; polynomials of degree ``tau`` in
    ``x`` and in ``eps`` span the same space. Antithetic QMC makes the odd projections of
    even functions exactly zero. Returns ``degree_cap + 1`` when nothing is found.
    """
    if degree_cap < 1:
        raise ValueError("degree_cap must be at least 1")
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    dim = cov.shape[0]
    L = np.linalg.cholesky(cov)
    eps = _antithetic_normals(dim, samples // 2, np.random.default_rng(seed))
    gx = np.asarray(g(eps @ L.T), dtype=float).reshape(eps.shape[0])
    if not np.all(np.isfinite(gx)):
        raise ValueError("g produced non-finite values")
    norm = math.sqrt(float(np.mean(gx**2)))
    if norm == 0:
        return degree_cap + 1
    centered = gx - gx.mean()
    he = [_hermite_1d(eps[:, i], degree_cap) for i in range(dim)]
    for deg in range(1, degree_cap + 1):
        for nu in multi_indices(dim, deg):
            basis = np.prod([he[i][v] for i, v in enumerate(nu)], axis=0)
            coef = float(np.mean(centered * basis)) / math.sqrt(_factorial(nu))
            if abs(coef) > threshold * norm:
                return deg
    return degree_cap + 1


def expansion_diagnostics(spec: FarimaSpec, n: int, r: int, k, innov: InnovationSpec, order: int = 3) -> dict:
    """One diagnostics row: cumulant size, covariance trace and extreme eigenvalues."""
    coeffs = coefficient_vectors(spec, n, r, k)
    V = coeffs.covariance
    ev = np.linalg.eigvalsh(V)
    return {
        "n": n,
        "k": " ".join(str(v) for v in coeffs.k),
        "order": order,
        "tensor_max": cumulant_tensor(coeffs, innov, order).max_abs,
        "trace_Vn": float(np.trace(V)),
        "lambda_min": float(ev.min()),
        "lambda_max": float(ev.max()),
    }
