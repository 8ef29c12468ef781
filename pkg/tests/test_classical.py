import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import expit, logsumexp

from ergm_bayes.classical import (LogRatio, grid_has_interior_maximum, log_ratio_surface, mcmle, mple,
                                  simulate_reference_stats)
from ergm_bayes.graph import Graph
from ergm_bayes.sampler import SamplerConfig, sample_graph
from ergm_bayes.statistics import ModelSpec, change_stats_all, global_stats

from conftest import random_graph

EDGES = ModelSpec.parse("edges")


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 10), st.booleans(), st.integers(0, 10**6))
def test_mple_edges_closed_form(n, directed, seed):
    g = random_graph(np.random.default_rng(seed), n, directed)
    e, N = g.edge_count, g.n_dyads
    if e in (0, N):
        fit = mple(g, ModelSpec.parse("edges", directed=directed))
        assert not fit.converged
        return
    fit = mple(g, ModelSpec.parse("edges", directed=directed))
    assert fit.converged
    assert fit.estimate[0] == pytest.approx(np.log(e / (N - e)), abs=1e-8)
    assert fit.std_errors[0] == pytest.approx(np.sqrt(1 / (e * (N - e) / N)), rel=1e-6)


def test_mple_gradient_is_zero(florentine):
    spec = ModelSpec.parse("edges + kstar2 + triangle")
    fit = mple(florentine, spec)
    X, y = change_stats_all(florentine, spec)
    grad = X.T @ (y - expit(X @ fit.estimate))
    assert np.max(np.abs(grad)) < 1e-8
    assert fit.converged and np.all(fit.std_errors > 0)


def test_mple_separation_reported():
    g = Graph(5)
    fit = mple(g, EDGES)
    assert not fit.converged
    assert fit.std_errors is None
    assert "message" in fit.diagnostics


def test_log_ratio_identity_and_formula():
    rng = np.random.default_rng(0)
    sample = rng.normal(size=(50, 2)) * [3, 10] + [20, 40]
    lr = LogRatio([0.1, -0.2], [18.0, 45.0], sample)
    assert lr.value([0.1, -0.2]) == 0.0
    theta = np.array([0.3, -0.1])
    dt = theta - lr.theta0
    direct = dt @ lr.s_obs - (logsumexp(sample @ dt) - np.log(50))
    assert lr.value(theta) == pytest.approx(direct, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_log_ratio_gradient_finite_differences(seed):
    rng = np.random.default_rng(seed)
    sample = rng.normal(size=(80, 3)) * [2, 5, 1] + [10, 30, 3]
    lr = LogRatio(rng.normal(size=3) * 0.1, rng.normal(size=3) + [10, 30, 3], sample)
    theta = lr.theta0 + rng.normal(size=3) * 0.1
    h = 1e-6
    fd = np.array([(lr.value(theta + h * e) - lr.value(theta - h * e)) / (2 * h) for e in np.eye(3)])
    g = lr.gradient(theta)
    assert np.allclose(fd, g, rtol=1e-5, atol=1e-6 * np.abs(g).max())
    # Hessian by differencing the gradient
    fh = np.array([(lr.gradient(theta + h * e) - lr.gradient(theta - h * e)) / (2 * h) for e in np.eye(3)])
    np.testing.assert_allclose(fh, lr.hessian(theta), rtol=1e-4, atol=1e-6)


def test_surface_reproducible_from_stored_stats(florentine):
    spec = ModelSpec.parse("edges + kstar2")
    S = simulate_reference_stats(florentine, spec, [-2.0, 0.0], 30, SamplerConfig(500), np.random.default_rng(1))
    grid = [np.array([-2.0, 0.0]), np.array([-1.5, 0.1])]
    surf = log_ratio_surface(florentine, spec, [-2.0, 0.0], 30, SamplerConfig(500), grid, sample_stats=S)
    assert surf[0][1] == 0.0
    s_obs = global_stats(florentine, spec)
    dt = grid[1] - [-2.0, 0.0]
    assert surf[1][1] == pytest.approx(dt @ s_obs - logsumexp(S @ dt) + np.log(30))


def test_grid_interior_maximum():
    x = np.linspace(-1, 1, 5)
    assert grid_has_interior_maximum(-(x[:, None] ** 2 + x[None, :] ** 2))
    assert not grid_has_interior_maximum(x[:, None] + x[None, :])


def test_mcmle_edges_matches_closed_form():
    n, p = 20, 0.25
    theta_true = np.log(p / (1 - p))
    g = sample_graph([theta_true], EDGES, Graph(n), SamplerConfig(20_000), np.random.default_rng(4))
    fit = mcmle(g, EDGES, [theta_true], m=2000, cfg=SamplerConfig(1000), rng=np.random.default_rng(5))
    mle = np.log(g.edge_count / (g.n_dyads - g.edge_count))
    assert fit.converged
    # MC error of the estimate: sd of the estimator around the exact MLE given m draws
    mc_se = fit.std_errors[0] / np.sqrt(fit.diagnostics["weight_ess"])
    assert abs(fit.estimate[0] - mle) < 3 * mc_se + 1e-3
    # refitting from the estimate with a fresh sample stays put
    again = mcmle(g, EDGES, fit.estimate, m=2000, cfg=SamplerConfig(1000), rng=np.random.default_rng(6))
    assert abs(again.estimate[0] - fit.estimate[0]) < 2 * mc_se + 1e-3


def test_mcmle_fails_at_degenerate_reference(florentine):
    spec = ModelSpec.parse("edges + kstar2")
    theta0 = mple(florentine, spec).estimate
    fit = mcmle(florentine, spec, theta0, m=200, cfg=SamplerConfig(20_000), rng=np.random.default_rng(0))
    assert not fit.converged
    assert fit.std_errors is None
    assert fit.diagnostics["failures"]
