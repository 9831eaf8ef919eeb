import numpy as np
import pytest

from lmperiodogram.edgeworth import DecorrelationParams
from lmperiodogram.filtermodel import FarimaSpec, InnovationSpec
from lmperiodogram.gph import SIGMA2, regressors
from lmperiodogram.harness import (
    MSE_SCAN_COLUMNS,
    ExperimentConfig,
    McResult,
    default_grid,
    edgeworth_fit_experiment,
    find_optimal_bandwidth,
    run_mse_experiment,
    verify_lemma8,
    write_rows,
)

GAUSS = InnovationSpec.parse("gaussian")


def result(grid, mse):
    z = np.zeros(len(grid))
    return McResult(100, 1, "gaussian", np.asarray(grid), z, np.asarray(mse, float), z, z, 10)


def test_optimal_bandwidth_rules():
    assert find_optimal_bandwidth(result([8, 9, 10], [3, 2, 1])) == 10
    assert find_optimal_bandwidth(result([36, 37, 38], [2, 1, 1])) == 37


def test_default_grid():
    g = default_grid(250, 1)
    assert g[0] == 8 and g[-1] == 41
    assert default_grid(5000, 1)[-1] == 833


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(FarimaSpec(), GAUSS, 250, 0)
    with pytest.raises(ValueError):
        ExperimentConfig(FarimaSpec(), GAUSS, 250, 10, bandwidth_grid=(100,))


def test_deterministic_across_threads():
    cfg = ExperimentConfig(FarimaSpec(0.3, (0.3,)), GAUSS, 256, 120, bandwidth_grid=(10, 20), master_seed=42)
    a = run_mse_experiment(cfg, threads=1)
    b = run_mse_experiment(cfg, threads=3)
    assert np.array_equal(a.mse, b.mse) and np.array_equal(a.bias, b.bias)


def test_white_noise_variance_oracle():
    n, m = 1024, 64
    cfg = ExperimentConfig(FarimaSpec(), GAUSS, n, 2000, bandwidth_grid=(m,), master_seed=7, truncation=1)
    res = run_mse_experiment(cfg)
    _, s2 = regressors(n, m, 1)
    assert abs(res.mse[0] - SIGMA2 / s2) <= 3 * res.se_mse[0]
    assert res.excluded == 0


def test_moment_consistency():
    cfg = ExperimentConfig(FarimaSpec(0.3, (0.3,)), GAUSS, 250, 200, master_seed=1, keep_estimates=True)
    res = run_mse_experiment(cfg)
    assert np.all(res.mse >= res.bias**2 - 3 * res.se_mse)
    assert res.d_hat.shape == (200, len(res.grid))
    assert res.mse[res.grid == res.optimal_m][0] == res.mse.min()


def test_scan_csv(tmp_path):
    cfg = ExperimentConfig(FarimaSpec(0.3), GAUSS, 128, 20, bandwidth_grid=(8, 9), master_seed=1)
    res = run_mse_experiment(cfg)
    p = tmp_path / "scan.csv"
    write_rows(p, res.scan_rows(), MSE_SCAN_COLUMNS)
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(MSE_SCAN_COLUMNS) and len(lines) == 3


def test_lemma8_white_noise():
    rep = verify_lemma8(FarimaSpec(), 1, (64, 128))
    assert max(row["dev"] for row in rep.rows) < 1e-10
    assert all(c < 1e-9 for c in rep.fitted_C.values())


def test_lemma8_long_memory_stable():
    rep = verify_lemma8(FarimaSpec(0.3), 1, (256, 512, 1024), params=DecorrelationParams("local", 2.0))
    assert rep.stability() <= 0.30


def test_lemma8_diagonal_pseudo_decays():
    ks = list(range(4, 33))
    rep = verify_lemma8(FarimaSpec(0.3), 1, (512,), k_j_pairs=[(k, k) for k in ks])
    vals = [row["dev"] for row in rep.rows]
    # trend: a straight-line fit in log k has a clearly negative slope
    assert np.polyfit(np.log(ks), np.log(vals), 1)[0] < -0.5


def test_edgeworth_gaussian_ratio():
    rep = edgeworth_fit_experiment(GAUSS, 64, 200_000, seed=3)
    assert 0.9 <= rep.l1_edgeworth / rep.l1_gauss <= 1.1


def test_edgeworth_distances_shrink_with_n():
    exp = InnovationSpec.parse("exponential")
    a = edgeworth_fit_experiment(exp, 64, 10**6, seed=1)
    b = edgeworth_fit_experiment(exp, 256, 10**6, seed=1)
    assert b.l1_gauss < a.l1_gauss and b.l1_edgeworth < a.l1_edgeworth
