"""Metropolis-Hastings graph simulation from pi(y | theta).

Two dyad proposals are available: uniform dyad selection and tie/no-tie
(TNT), which first picks the edge set or the empty-dyad set with equal
probability.  TNT is not symmetric, so its Hastings correction is applied.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .graph import Dyad, Graph, shared_partner_matrix
from .statistics import ModelSpec, dyad_index, global_stats

PROPOSALS = {"tnt": K.PROPOSAL_TNT, "uniform": K.PROPOSAL_UNIFORM}


@dataclass
class SamplerConfig:
    iterations: int = 1000
    proposal: str = "tnt"
    seed: int | None = None
    record_stats_every: int | None = None

    def __post_init__(self):
        self.proposal = self.proposal.lower()
        if self.proposal not in PROPOSALS:
            raise ValueError(f"unknown proposal {self.proposal!r}; use 'tnt' or 'uniform'")
        if int(self.iterations) < 1:
            raise ValueError("sampler iterations must be >= 1")
        self.iterations = int(self.iterations)
        if self.record_stats_every is not None and int(self.record_stats_every) < 1:
            raise ValueError("record_stats_every must be >= 1")


def as_rng(rng=None, seed=None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(seed if rng is None else rng)


class ChainState:
    """Array bundle the compiled chain mutates.

    Built once from a starting graph; :meth:`copy` is a handful of memcpys
    so auxiliary chains can restart from the observed graph cheaply.
    """

    def __init__(self, g: Graph, spec: ModelSpec):
        spec.check(g)
        self.spec = spec
        self.n = g.n
        self.directed = g.directed
        self.adj = g.adj.copy()
        self.deg_out = g.out_degree.astype(np.int64).copy()
        self.deg_in = self.deg_out if not g.directed else g.in_degree.astype(np.int64).copy()
        self.use_sp = spec.needs_shared_partners
        self.sp = shared_partner_matrix(g) if self.use_sp else np.zeros((1, 1), dtype=np.int64)
        self.dyad_i, self.dyad_j = dyad_index(g.n, g.directed)
        on = self.adj[self.dyad_i, self.dyad_j] == 1
        self.perm = np.concatenate([np.nonzero(on)[0], np.nonzero(~on)[0]]).astype(np.int64)
        self.where = np.empty_like(self.perm)
        self.where[self.perm] = np.arange(self.perm.size)
        code = 0
        for k in np.nonzero(on)[0]:
            if k < 63:
                code |= 1 << int(k)
        self.state = np.array([int(on.sum()), code], dtype=np.int64)
        self.stats = global_stats(g, spec)
        with np.errstate(divide="ignore"):
            self.logk = np.log(np.arange(self.n_dyads + 1, dtype=np.float64))
        self.delta = np.empty(spec.dim)

    def copy(self) -> "ChainState":
        new = object.__new__(ChainState)
        new.__dict__.update(self.__dict__)
        new.adj = self.adj.copy()
        new.deg_out = self.deg_out.copy()
        new.deg_in = new.deg_out if not self.directed else self.deg_in.copy()
        new.sp = self.sp.copy()
        new.perm = self.perm.copy()
        new.where = self.where.copy()
        new.state = self.state.copy()
        new.stats = self.stats.copy()
        new.delta = np.empty(self.spec.dim)
        return new

    @property
    def n_dyads(self) -> int:
        return int(self.dyad_i.size)

    def run(self, theta, uniforms: np.ndarray, proposal: str = "tnt", record_every: int = 0):
        """Advance the chain by ``len(uniforms)`` proposals.

        Returns ``(accepted, trace, codes)``; the traces are empty unless
        ``record_every`` is positive.
        """
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (self.spec.dim,):
            raise ValueError(f"theta must have length {self.spec.dim}")
        rows = uniforms.shape[0] // record_every if record_every > 0 else 0
        trace = np.empty((rows, self.spec.dim))
        codes = np.empty(rows, dtype=np.int64)
        acc = K.run_chain(self.adj, self.deg_out, self.deg_in, self.sp, self.use_sp, self.directed,
                          self.perm, self.where, self.state, self.dyad_i, self.dyad_j,
                          self.spec.codes, self.spec.decays, theta, self.stats, uniforms,
                          PROPOSALS[proposal], record_every, trace, codes, self.delta, self.logk)
        return acc, trace, codes

    def to_graph(self) -> Graph:
        g = Graph(self.n, self.directed)
        g.adj[:] = self.adj
        g.recompute_caches()
        return g


def tnt_propose(g: Graph, rng=None) -> tuple[Dyad, float]:
    """Draw one TNT dyad and the log Hastings ratio log q(y|y') - log q(y'|y)."""
    rng = as_rng(rng)
    ii, jj = dyad_index(g.n, g.directed)
    n_dyads = ii.size
    if n_dyads == 0:
        raise ValueError("graph has no dyads")
    on = g.adj[ii, jj] == 1
    e = int(on.sum())
    if e == 0:
        removing = False
    elif e == n_dyads:
        removing = True
    else:
        removing = rng.random() < 0.5
    pool = np.nonzero(on if removing else ~on)[0]
    k = pool[rng.integers(pool.size)]
    return Dyad(int(ii[k]), int(jj[k])), float(K.tnt_log_hastings(e, n_dyads, removing))


def _uniforms(rng: np.random.Generator, iterations: int) -> np.ndarray:
    return rng.random((iterations, 3))


def sample_graph(theta, spec: ModelSpec, init: Graph, cfg: SamplerConfig, rng=None) -> Graph:
    """Approximate draw from pi(y | theta) after ``cfg.iterations`` proposals from ``init``."""
    rng = as_rng(rng, cfg.seed)
    st = ChainState(init, spec)
    st.run(theta, _uniforms(rng, cfg.iterations), cfg.proposal)
    return st.to_graph()


def stats_trace(theta, spec: ModelSpec, init: Graph, cfg: SamplerConfig, rng=None) -> np.ndarray:
    """s(y) recorded every ``cfg.record_stats_every`` proposals (default every one)."""
    rng = as_rng(rng, cfg.seed)
    every = cfg.record_stats_every or 1
    st = ChainState(init, spec)
    _, trace, _ = st.run(theta, _uniforms(rng, cfg.iterations), cfg.proposal, every)
    return trace


def state_code_trace(theta, spec: ModelSpec, init: Graph, cfg: SamplerConfig, rng=None) -> np.ndarray:
    """Bit code of the visited graph (bit k = dyad k) every recorded step.

    Only meaningful for graphs with at most 62 dyads; used for exact-law
    checks against enumeration on tiny graphs.
    """
    rng = as_rng(rng, cfg.seed)
    every = cfg.record_stats_every or 1
    st = ChainState(init, spec)
    if st.n_dyads > 62:
        raise ValueError("state codes need at most 62 dyads")
    _, _, codes = st.run(theta, _uniforms(rng, cfg.iterations), cfg.proposal, every)
    return codes


def draw_aux_stats(base: ChainState, theta, rng: np.random.Generator, cfg: SamplerConfig) -> np.ndarray:
    """s(y') for one auxiliary draw started from ``base`` (left untouched)."""
    st = base.copy()
    st.run(theta, _uniforms(rng, cfg.iterations), cfg.proposal)
    return st.stats.copy()


def draw_aux_graph(base: ChainState, theta, rng: np.random.Generator, cfg: SamplerConfig) -> Graph:
    st = base.copy()
    st.run(theta, _uniforms(rng, cfg.iterations), cfg.proposal)
    return st.to_graph()
