import math
import os
import subprocess

import numpy as np
import pytest

import uar

scipy_stats = pytest.importorskip("scipy.stats")


def sample_pair(n, alpha, seed):
    model = uar.complex_pair_model()
    eps = uar.sample_innovations(uar.InnovationSpec.exact(alpha), n - 2, seed)
    return uar.simulate_from_rest(model, eps).values


def test_complex_pair_model_coefficients():
    phi = uar.complex_pair_model().phi
    assert phi[0] == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert phi[1] == pytest.approx(-1.0)
    assert uar.verify_unit_roots(uar.complex_pair_model())


def test_ls_matches_numpy_lstsq():
    x = np.array(sample_pair(300, 1.3, 3))
    design = np.column_stack([x[1:-1], x[:-2]])
    expected, *_ = np.linalg.lstsq(design, x[2:], rcond=None)
    fit = uar.ls_estimate(list(x), 2)
    assert np.allclose(fit.phi_hat, expected, rtol=1e-9, atol=1e-12)


def test_huber_fit_and_gradient():
    x = sample_pair(200, 1.1, 4)
    loss = uar.huber_loss(5.0)
    fit = uar.m_estimate(x, 2, loss)
    assert fit.converged
    _, grad = uar.objective_and_gradient(x, 2, loss, fit.phi_hat)
    scale = max(abs(v) for v in x)
    assert max(abs(g) for g in grad) < 1e-6 * scale * len(x)
    with pytest.raises(uar.EstimationError):
        uar.ls_estimate([0.0] * 10, 1)


def test_gaussian_case_against_scipy():
    spec = uar.InnovationSpec.exact(2.0, 1.0)
    draws = uar.sample_innovations(spec, 20000, 5)
    assert scipy_stats.kstest(np.array(draws) / math.sqrt(2.0), "norm").pvalue > 1e-3
    assert uar.norming_constant(spec, 400) == pytest.approx(math.sqrt(800.0))
    assert uar.cdf(spec, 1.0) == pytest.approx(scipy_stats.norm.cdf(1.0 / math.sqrt(2.0)), rel=1e-9)


def test_ks_matches_scipy():
    a = [0.1, 0.5, 0.9, 1.3, 2.2, 3.1, 0.7]
    b = [1.0, 1.4, 2.5, 2.9, 3.3, 4.0, 0.2, 5.1]
    stat, _ = uar.ks_two_sample(a, b)
    assert stat == pytest.approx(scipy_stats.ks_2samp(a, b).statistic)


def test_loss_moments_gaussian():
    m = uar.loss_moments(uar.huber_loss(1.0), uar.InnovationSpec.exact(2.0, 1.0 / math.sqrt(2.0)))
    assert m.e_psi_prime == pytest.approx(scipy_stats.norm.cdf(1.0) - scipy_stats.norm.cdf(-1.0), rel=1e-9)


def test_limit_and_bootstrap_round_trip():
    mom = uar.loss_moments(uar.huber_loss(5.0), uar.InnovationSpec.exact(1.3))
    draw = uar.limit_sample_complex(math.pi / 4, 1, 1.3, mom, seed=1, mesh=200)
    assert draw.matrix.shape == (2, 2)
    assert draw.matrix[0, 1] / draw.matrix[0, 0] == pytest.approx(math.cos(math.pi / 4))

    x = sample_pair(100, 1.5, 6)
    fit = uar.m_estimate(x, 2, uar.huber_loss(5.0))
    cfg = uar.BootstrapConfig()
    cfg.replicates = 100
    first = uar.bootstrap_replicates(x, fit.phi_hat, cfg, 9)
    second = uar.bootstrap_replicates(x, fit.phi_hat, cfg, 9)
    assert np.array_equal(first.estimates, second.estimates)
    assert first.interval[0].lower <= first.interval[0].upper
    assert first.m_used == uar.MRule.power(0.95).resample_size(100, 2)


def test_mc_table_binding():
    cfg = uar.ExperimentConfig()
    cfg.n_list = [30]
    cfg.alpha_list = [1.5]
    cfg.replicates = 10
    rows = uar.mc_table(cfg)
    assert [r.estimator for r in rows] == ["M:5", "LS"]
    assert all(r.replicates + r.failures == 10 for r in rows)


@pytest.mark.skipif("UAR_CLI" not in os.environ, reason="command-line binary not provided")
def test_cli_simulate_then_estimate(tmp_path):
    cli = os.environ["UAR_CLI"]
    subprocess.run([cli, "--out-dir", str(tmp_path), "simulate", "--n", "120"], check=True, capture_output=True)
    series = tmp_path / "series.csv"
    lines = series.read_text().splitlines()
    assert lines[0] == "t,x,eps"
    assert len(lines) == 122
    values = [float(row.split(",")[1]) for row in lines[2:]]
    done = subprocess.run([cli, "--out-dir", str(tmp_path), "estimate", "--input", str(series)],
                          check=True, capture_output=True, text=True)
    assert "converged=true" in done.stdout
    fit = uar.m_estimate(values, 2, uar.huber_loss(5.0))
    reported = (tmp_path / "estimate.csv").read_text().splitlines()[1].split(",")
    assert float(reported[1]) == pytest.approx(fit.phi_hat[0], rel=1e-12)
