import numpy as np
import pytest

from ergm_bayes.diagnostics import (autocorrelation, effective_sample_size, first_negligible_lag,
                                    summarize)


def ar1(rho, n, seed):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0] / np.sqrt(1 - rho ** 2)
    for t in range(1, n):
        x[t] = rho * x[t - 1] + e[t]
    return x


def test_white_noise_acf():
    n = 20000
    acf = autocorrelation(np.random.default_rng(0).standard_normal(n), 200)
    assert acf[0] == 1.0
    assert np.mean(np.abs(acf[1:]) < 3 / np.sqrt(n)) >= 0.98


def test_ar1_acf_and_ess():
    x = ar1(0.9, 100_000, 1)
    acf = autocorrelation(x, 10)
    np.testing.assert_allclose(acf, 0.9 ** np.arange(11), atol=0.02)
    res = effective_sample_size(x)
    assert res.ess == pytest.approx(x.size * 0.1 / 1.9, rel=0.2)
    assert not res.degenerate


def test_acf_bounds_and_fft_matches_direct():
    x = np.random.default_rng(3).normal(size=300).cumsum()
    acf = autocorrelation(x, 50)
    assert np.all(np.abs(acf) <= 1)
    xc = x - x.mean()
    direct = np.array([xc[: x.size - k] @ xc[k:] for k in range(51)]) / (xc @ xc)
    np.testing.assert_allclose(acf, direct, atol=1e-12)


def test_iid_ess_and_constant():
    x = np.random.default_rng(4).standard_normal(20000)
    assert effective_sample_size(x).ess == pytest.approx(20000, rel=0.1)
    res = effective_sample_size(np.ones(50))
    assert res.degenerate and res.ess == 50
    acf = autocorrelation(np.ones(20), 5)
    assert acf[0] == 1 and np.all(np.isnan(acf[1:]))
    with pytest.raises(ValueError):
        effective_sample_size(np.ones(5))
    with pytest.raises(ValueError):
        autocorrelation(np.ones(5), 5)


def test_first_negligible_lag():
    x = ar1(0.9, 50_000, 2)
    # 0.9^k < 0.05 first at k = 29
    assert 24 <= first_negligible_lag(x) <= 35


def test_summarize_constant_and_pooled():
    s = summarize([np.full((10, 2), 3.0)])
    np.testing.assert_array_equal(s.pooled_mean, [3, 3])
    np.testing.assert_array_equal(s.pooled_sd, [0, 0])
    a = np.array([[1.0], [2.0], [3.0], [4.0]])
    b = np.array([[5.0], [7.0], [9.0], [11.0]])
    s = summarize([a, b])
    assert s.pooled_mean[0] == pytest.approx(np.mean([1, 2, 3, 4, 5, 7, 9, 11]))
    assert s.pooled_sd[0] == pytest.approx(np.std([1, 2, 3, 4, 5, 7, 9, 11], ddof=1))
    np.testing.assert_allclose(s.chain_means[:, 0], [2.5, 8.0])
    # pooled mean is the mean of chain means for equal lengths, and order does not matter
    assert s.pooled_mean[0] == pytest.approx(s.chain_means.mean())
    r = summarize([b, a])
    assert r.pooled_mean[0] == s.pooled_mean[0] and r.pooled_sd[0] == s.pooled_sd[0]


def test_summarize_burn_in_and_errors():
    x = np.arange(100.0)[:, None]
    s = summarize([x], burn_in=0.5)
    assert s.pooled_mean[0] == pytest.approx(74.5)
    with pytest.raises(ValueError):
        summarize([])
    with pytest.raises(ValueError):
        summarize([np.zeros((5, 2)), np.zeros((5, 3))])


def test_ess_bounded_on_mcmc_output(florentine):
    from ergm_bayes.exchange import ExchangeConfig, Prior, run_exchange
    from ergm_bayes.sampler import SamplerConfig
    from ergm_bayes.statistics import ModelSpec
    out = run_exchange(florentine, ModelSpec.parse("edges + kstar2"), Prior.isotropic(2, 30),
                       ExchangeConfig(1500, SamplerConfig(300), [1.0, 0.3], seed=1))
    for k in range(2):
        assert effective_sample_size(out.draws[:, k]).ess <= out.draws.shape[0]
