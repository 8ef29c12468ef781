import numpy as np
import pytest

from ergm_bayes.graph import Graph
from ergm_bayes.sampler import (ChainState, SamplerConfig, sample_graph, state_code_trace, stats_trace,
                                tnt_propose)
from ergm_bayes.statistics import ModelSpec, dyad_index, global_stats
from ergm_bayes import _kernels as K


def exact_law(n, directed, spec, theta):
    ii, jj = dyad_index(n, directed)
    m = ii.size
    logw = np.empty(2 ** m)
    for code in range(2 ** m):
        g = Graph.from_edges(n, [(ii[k], jj[k]) for k in range(m) if code >> k & 1], directed)
        logw[code] = theta @ global_stats(g, spec)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def total_variation(codes, law):
    emp = np.bincount(codes, minlength=law.size) / codes.size
    return 0.5 * np.abs(emp - law).sum()


@pytest.mark.parametrize("proposal", ["tnt", "uniform"])
def test_directed_exact_law(proposal):
    n = 3
    spec = ModelSpec.parse("edges + mutual + ctriple", directed=True)
    theta = np.array([-0.3, 0.8, 0.5])
    law = exact_law(n, True, spec, theta)
    codes = state_code_trace(theta, spec, Graph(n, True), SamplerConfig(400_000, proposal),
                             np.random.default_rng(11))
    assert total_variation(codes, law) < 0.02


def test_gw_exact_law():
    n = 4
    spec = ModelSpec.parse("edges + gwdegree(0.7) + gwesp(0.4)")
    theta = np.array([-0.4, 0.3, 0.5])
    law = exact_law(n, False, spec, theta)
    codes = state_code_trace(theta, spec, Graph(n), SamplerConfig(400_000), np.random.default_rng(5))
    assert total_variation(codes, law) < 0.02


def test_tnt_hastings_against_direct_ratio():
    # q(y -> y') for TNT from a graph with e edges among N dyads
    def q(e, N, removing):
        if e == 0:
            return 1.0 / N
        if e == N:
            return 1.0 / N
        return 0.5 / (e if removing else N - e)

    N = 10
    for e in range(N + 1):
        for removing in (True, False):
            if (removing and e == 0) or (not removing and e == N):
                continue
            e2 = e - 1 if removing else e + 1
            expected = np.log(q(e2, N, not removing)) - np.log(q(e, N, removing))
            assert K.tnt_log_hastings(e, N, removing) == pytest.approx(expected)


def test_tnt_propose_on_empty_and_complete():
    rng = np.random.default_rng(0)
    g = Graph(4)
    d, lh = tnt_propose(g, rng)
    assert not g.has_edge(*d)
    full = Graph.from_adjacency(np.ones((4, 4)) - np.eye(4))
    d, _ = tnt_propose(full, rng)
    assert full.has_edge(*d)


def test_running_stats_match_final_graph(florentine):
    spec = ModelSpec.parse("edges + kstar2 + triangle + gwesp(0.8) + gwdegree(0.5)")
    st = ChainState(florentine, spec)
    st.run(np.array([-2.0, 0.05, 0.2, 0.1, 0.1]), np.random.default_rng(3).random((50_000, 3)), "tnt")
    g = st.to_graph()
    np.testing.assert_allclose(st.stats, global_stats(g, spec), atol=1e-8)
    # partition invariant: the first E entries of perm are exactly the edges
    e = st.state[0]
    assert e == g.edge_count
    on = g.adj[st.dyad_i, st.dyad_j] == 1
    assert set(st.perm[:e]) == set(np.nonzero(on)[0])
    np.testing.assert_array_equal(st.where[st.perm], np.arange(st.perm.size))
    np.testing.assert_array_equal(st.sp, g.adj.astype(int) @ g.adj.astype(int) - np.diag(g.degree))


def test_same_seed_same_graph(florentine):
    spec = ModelSpec.parse("edges + kstar2")
    cfg = SamplerConfig(5000, seed=9)
    a = sample_graph([-2.0, 0.1], spec, florentine, cfg)
    b = sample_graph([-2.0, 0.1], spec, florentine, cfg)
    assert a == b


def test_edges_only_mean_density():
    spec = ModelSpec.parse("edges")
    tr = stats_trace([np.log(0.3 / 0.7)], spec, Graph(12),
                     SamplerConfig(400_000, record_stats_every=50), np.random.default_rng(2))
    assert tr[100:, 0].mean() / 66 == pytest.approx(0.3, abs=0.01)


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(0)
    with pytest.raises(ValueError):
        SamplerConfig(10, "gibbs")
