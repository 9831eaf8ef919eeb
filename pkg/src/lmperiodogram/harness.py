"""Seeded Monte Carlo experiments: GPH bandwidth scans, DFT decorrelation checks and
Edgeworth fit diagnostics."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .edgeworth import DecorrelationParams, EdgeworthExpansion, decorrelation_bound, gaussian_density
from .filtermodel import SIM_TRUNCATION, FarimaSpec, InnovationSpec, autocovariance, ma_coefficients
from .gph import bandwidth_weights, check_bandwidth, regression_indices
from .simulate import SeedSpec, filter_innovations, sample_innovations
from .spectral import exact_dft_cov_matrix, fourier_frequencies, n_tilde, sigma_r, tapered_dft_all

__all__ = [
    "ExperimentConfig",
    "McResult",
    "default_grid",
    "run_mse_experiment",
    "find_optimal_bandwidth",
    "Lemma8Report",
    "verify_lemma8",
    "EdgeworthReport",
    "edgeworth_fit_experiment",
    "write_rows",
    "MSE_SCAN_COLUMNS",
    "TABLE1_COLUMNS",
    "LEMMA8_COLUMNS",
    "EDGEWORTH_COLUMNS",
]

log = logging.getLogger(__name__)

MSE_SCAN_COLUMNS = ["n", "m", "r", "innovation", "bias", "mse", "se_bias", "se_mse"]
TABLE1_COLUMNS = ["n", "innovation", "m_opt", "bias_at_opt", "mse_at_opt"]
LEMMA8_COLUMNS = ["n", "k", "j", "dev", "bound", "fitted_C"]
EDGEWORTH_COLUMNS = ["n", "reps", "l1_gauss", "l1_edgeworth"]

# Replications are simulated in fixed blocks; the partition never depends on thread count.
CHUNK = 50


def default_grid(n: int, r: int = 1) -> list[int]:
    """All integers in ``[8, n // 6]`` that are valid bandwidths for ``(n, r)``."""
    hi = n // 6
    grid = []
    for m in range(8, hi + 1):
        try:
            check_bandwidth(n, m, r)
        except ValueError:
            break
        grid.append(m)
    return grid


def _resolve_threads(threads: int) -> int:
    return max(1, os.cpu_count() or 1) if threads == 0 else max(1, int(threads))


@dataclass(frozen=True)
class ExperimentConfig:
    model: FarimaSpec
    innovations: InnovationSpec
    n: int
    replications: int
    bandwidth_grid: tuple[int, ...] | None = None
    taper_order: int = 1
    master_seed: int = 0
    truncation: int = SIM_TRUNCATION
    keep_estimates: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        grid = (
            tuple(default_grid(self.n, self.taper_order))
            if self.bandwidth_grid is None
            else tuple(sorted({int(m) for m in self.bandwidth_grid}))
        )
        if not grid:
            raise ValueError(f"empty bandwidth grid for n={self.n}")
        for m in grid:
            check_bandwidth(self.n, m, self.taper_order)
        object.__setattr__(self, "bandwidth_grid", grid)


@dataclass
class McResult:
    n: int
    taper_order: int
    innovation: str
    grid: np.ndarray
    bias: np.ndarray
    mse: np.ndarray
    se_bias: np.ndarray
    se_mse: np.ndarray
    replications: int
    excluded: int = 0
    d_hat: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal_m(self) -> int:
        return find_optimal_bandwidth(self)

    def at(self, m: int) -> dict:
        i = int(np.flatnonzero(self.grid == m)[0])
        return {"m": m, "bias": self.bias[i], "mse": self.mse[i], "se_bias": self.se_bias[i], "se_mse": self.se_mse[i]}

    def scan_rows(self) -> list[dict]:
        return [
            {
                "n": self.n, "m": int(m), "r": self.taper_order, "innovation": self.innovation,
                "bias": self.bias[i], "mse": self.mse[i], "se_bias": self.se_bias[i], "se_mse": self.se_mse[i],
            }
            for i, m in enumerate(self.grid)
        ]

    def table1_row(self) -> dict:
        m = self.optimal_m
        row = self.at(m)
        return {"n": self.n, "innovation": self.innovation, "m_opt": m, "bias_at_opt": row["bias"], "mse_at_opt": row["mse"]}


def find_optimal_bandwidth(result: McResult) -> int:
    """Grid point of minimal MSE; ties go to the smaller bandwidth."""
    grid = np.asarray(result.grid)
    mse = np.asarray(result.mse)
    if grid.size == 0:
        raise ValueError("empty bandwidth grid")
    order = np.argsort(grid, kind="stable")
    best = order[np.argmin(mse[order])]
    return int(grid[best])


def _simulate_block(cfg: ExperimentConfig, psi: np.ndarray, start: int, stop: int) -> np.ndarray:
    T, n = cfg.truncation, cfg.n
    Z = np.empty((stop - start, T + n))
    for row, i in enumerate(range(start, stop)):
        Z[row] = sample_innovations(cfg.innovations, T + n, SeedSpec(cfg.master_seed, i))
    return filter_innovations(psi, Z, n)


def _gph_block(cfg, psi, W, idx, start, stop):
    X = _simulate_block(cfg, psi, start, stop)
    I = tapered_dft_all(X, cfg.taper_order).periodogram[:, idx - 1]
    bad = np.any(I <= 0, axis=1)
    with np.errstate(divide="ignore"):
        logI = np.log(I)
    logI[bad] = 0.0
    return logI @ W.T, bad


def run_mse_experiment(cfg: ExperimentConfig, threads: int = 1) -> McResult:
    """Monte Carlo bias and MSE of the GPH estimator over the bandwidth grid.

    Each replication draws its own seeded innovation stream, computes one tapered
    periodogram and evaluates ``d_hat`` for every bandwidth from it.
    """
    grid = np.asarray(cfg.bandwidth_grid)
    psi = ma_coefficients(cfg.model, cfg.truncation)
    W = bandwidth_weights(cfg.n, grid, cfg.taper_order)
    idx = regression_indices(int(grid.max()), cfg.taper_order)
    blocks = [(s, min(s + CHUNK, cfg.replications)) for s in range(0, cfg.replications, CHUNK)]
    workers = _resolve_threads(threads)
    if workers == 1:
        parts = [_gph_block(cfg, psi, W, idx, a, b) for a, b in blocks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda ab: _gph_block(cfg, psi, W, idx, *ab), blocks))
    D = np.concatenate([p[0] for p in parts])
    bad = np.concatenate([p[1] for p in parts])
    if bad.any():
        log.warning("%d replications excluded: zero periodogram ordinate", int(bad.sum()))
    D = D[~bad]
    R = D.shape[0]
    if R == 0:
        raise RuntimeError("every replication was excluded")
    err = D - cfg.model.d
    sq = err**2
    ddof = 1 if R > 1 else 0
    return McResult(
        n=cfg.n,
        taper_order=cfg.taper_order,
        innovation=cfg.innovations.name,
        grid=grid,
        bias=err.mean(axis=0),
        mse=sq.mean(axis=0),
        se_bias=err.std(axis=0, ddof=ddof) / math.sqrt(R),
        se_mse=sq.std(axis=0, ddof=ddof) / math.sqrt(R),
        replications=R,
        excluded=int(bad.sum()),
        d_hat=D if cfg.keep_estimates else None,
    )


def _lemma8_pairs(n: int) -> list[tuple[int, int]]:
    top = n // 8
    return [(k, j) for j in range(2, top + 1) for k in range(1, j)]


@dataclass
class Lemma8Report:
    rows: list[dict]
    fitted_C: dict[int, float]

    def stability(self) -> float:
        """Largest relative departure of the per-``n`` constants from their mean."""
        c = np.array(list(self.fitted_C.values()))
        return float(np.max(np.abs(c / c.mean() - 1.0))) if c.mean() > 0 else 0.0


def verify_lemma8(
    spec: FarimaSpec,
    r: int = 1,
    n_list: Sequence[int] = (256, 512, 1024),
    k_j_pairs: Iterable[tuple[int, int]] | None = None,
    params: DecorrelationParams = DecorrelationParams("local", 2.0),
) -> Lemma8Report:
    """Tabulate ``|E w_k w_j| + |E w_k conj(w_j) - sigma_r(k - j)|`` against ``p(k, j, n, beta)``.

    The fitted constant for each ``n`` is the largest ratio of deviation to bound.
    """
    rows: list[dict] = []
    fitted: dict[int, float] = {}
    given = None if k_j_pairs is None else [tuple(sorted(p)) for p in k_j_pairs]
    for n in n_list:
        pairs = _lemma8_pairs(n) if given is None else given
        freqs = sorted({v for p in pairs for v in p})
        pos = {v: i for i, v in enumerate(freqs)}
        cov = exact_dft_cov_matrix(spec, n, r, freqs, gamma=autocovariance(spec, n - 1))
        block = []
        for k, j in pairs:
            a, b = pos[k], pos[j]
            dev = abs(cov.pseudo[a, b]) + abs(cov.herm[a, b] - sigma_r(r, k - j))
            bound = decorrelation_bound(k, j, n, params)
            block.append({"n": n, "k": k, "j": j, "dev": float(dev), "bound": float(bound)})
        C = max(row["dev"] / row["bound"] for row in block)
        for row in block:
            row["fitted_C"] = C
        fitted[n] = C
        rows.extend(block)
    return Lemma8Report(rows, fitted)


@dataclass
class EdgeworthReport:
    n: int
    reps: int
    k: int
    l1_gauss: float
    l1_edgeworth: float

    def row(self) -> dict:
        return {"n": self.n, "reps": self.reps, "l1_gauss": self.l1_gauss, "l1_edgeworth": self.l1_edgeworth}


def edgeworth_fit_experiment(
    innov: InnovationSpec,
    n: int = 64,
    replications: int = 10**6,
    *,
    k: int | None = None,
    s: int = 4,
    bins: int = 64,
    extent: float = 4.0,
    seed: int = 0,
    chunk: int = 20_000,
) -> EdgeworthReport:
    """Compare the empirical law of ``S_n(k)`` for white noise (``r = 0``) with the
    Gaussian limit and the order-``s`` Edgeworth density, by L1 distance between a
    2-D histogram density and each density at the bin centres."""
    from .edgeworth import coefficient_vectors

    if k is None:
        k = max(1, n_tilde(n, 0) // 4)
    t = np.arange(1, n + 1)
    lam = fourier_frequencies(n, k)
    # white noise, r = 0: S_n(k) = n^{-1/2} sum_t Z_t (cos, sin)(t lambda_k)
    C = np.stack([np.cos(t * lam), np.sin(t * lam)], axis=1) / math.sqrt(n)
    edges = np.linspace(-extent, extent, bins + 1)
    counts = np.zeros((bins, bins))
    for i, start in enumerate(range(0, replications, chunk)):
        size = min(chunk, replications - start)
        Z = sample_innovations(innov, size * n, SeedSpec(seed, i)).reshape(size, n)
        S = Z @ C
        h, _, _ = np.histogram2d(S[:, 0], S[:, 1], bins=[edges, edges])
        counts += h
    area = (edges[1] - edges[0]) ** 2
    emp = counts / (replications * area)
    mid = 0.5 * (edges[1:] + edges[:-1])
    grid = np.stack(np.meshgrid(mid, mid, indexing="ij"), axis=-1).reshape(-1, 2)
    expansion = EdgeworthExpansion.from_coefficients(
        coefficient_vectors(FarimaSpec(), n, 0, (k,)), innov, s=s
    )
    gauss = gaussian_density(grid, expansion.V).reshape(bins, bins)
    edge = expansion.density(grid).reshape(bins, bins)
    return EdgeworthReport(
        n=n,
        reps=replications,
        k=k,
        l1_gauss=float(np.sum(np.abs(emp - gauss)) * area),
        l1_edgeworth=float(np.sum(np.abs(emp - edge)) * area),
    )


def write_rows(path, rows: Iterable[dict], columns: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({c: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for c, v in row.items()})
