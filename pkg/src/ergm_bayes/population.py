"""Population exchange MCMC with adaptive direction sampling (ADS).

``H`` chains target the same posterior.  After a warmup of independent
block random-walk updates, chain ``h`` proposes

    theta_h + gamma * (theta_h1 - theta_h2) + eps

with ``h1 != h2`` drawn from the other chains.  Every chain reads the other
chains from a snapshot taken at the start of the iteration, so the chains of
one iteration could be updated in any order (or concurrently).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exchange import ChainOutput, Prior
from .graph import Graph
from .sampler import ChainState, SamplerConfig, draw_aux_stats
from .statistics import ModelSpec, global_stats


@dataclass
class PopulationConfig:
    """Settings for :func:`run_population`.

    ``iterations_per_chain`` counts warmup iterations too.  ``warmup`` of
    ``None`` means 20% of that.  ``block_sd`` scales the warmup block
    random walk and defaults to the square root of the diagonal of
    ``epsilon_cov``.  ``init`` is an ``H x d`` array; without it chains
    start at draws from N(prior mean, init_sd^2 I).
    """

    prior: Prior
    H: int | None = None
    gamma: float = 1.0
    epsilon_cov: np.ndarray | float = 0.1
    iterations_per_chain: int = 6000
    warmup: int | None = None
    aux: SamplerConfig = field(default_factory=SamplerConfig)
    block_sd: np.ndarray | None = None
    init: np.ndarray | None = None
    init_sd: float = 3.0
    seed: int | None = None
    keep_aux_stats: bool = False

    def __post_init__(self):
        d = self.prior.dim
        if self.H is None:
            self.H = 2 * d
        self.H = int(self.H)
        if self.H < 3:
            raise ValueError("ADS needs at least 3 chains")
        if not np.isfinite(self.gamma):
            raise ValueError("gamma must be finite")
        cov = np.asarray(self.epsilon_cov, dtype=float)
        if cov.ndim == 0:
            cov = float(cov) * np.eye(d)
        if cov.shape != (d, d) or not np.allclose(cov, cov.T):
            raise ValueError("epsilon_cov must be a symmetric d x d matrix")
        try:
            self.epsilon_chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError("epsilon_cov must be positive definite") from exc
        self.epsilon_cov = cov
        self.iterations_per_chain = int(self.iterations_per_chain)
        if self.warmup is None:
            self.warmup = int(round(0.2 * self.iterations_per_chain))
        self.warmup = int(self.warmup)
        if not 0 <= self.warmup < self.iterations_per_chain:
            raise ValueError("warmup must be in [0, iterations_per_chain)")
        if self.block_sd is None:
            self.block_sd = np.sqrt(np.diag(cov))
        self.block_sd = np.broadcast_to(np.asarray(self.block_sd, dtype=float), (d,)).copy()
        if np.any(self.block_sd <= 0):
            raise ValueError("block_sd must be positive")
        if self.init is not None:
            self.init = np.asarray(self.init, dtype=float)
            if self.init.shape != (self.H, d):
                raise ValueError(f"init must have shape ({self.H}, {d})")


@dataclass
class PopulationResult:
    chains: list[ChainOutput]
    warmup_draws: np.ndarray
    overall_acceptance: float

    def pooled(self) -> np.ndarray:
        return np.vstack([c.draws for c in self.chains])


def ads_propose(states, h: int, gamma: float, eps, rng: np.random.Generator) -> np.ndarray:
    """``states[h] + gamma * (states[h1] - states[h2]) + eps`` for random distinct h1, h2 != h."""
    states = np.asarray(states, dtype=float)
    H = states.shape[0]
    if H < 3:
        raise ValueError("ADS needs at least 3 chains")
    others = np.delete(np.arange(H), h)
    h1, h2 = rng.choice(others, size=2, replace=False)
    return states[h] + gamma * (states[h1] - states[h2]) + np.asarray(eps, dtype=float)


def run_population(g: Graph, spec: ModelSpec, cfg: PopulationConfig) -> PopulationResult:
    d = spec.dim
    H = cfg.H
    prior = cfg.prior
    if prior.dim != d:
        raise ValueError("prior dimension does not match the model")
    # stream 0 draws the starting points, stream h+1 belongs to chain h
    root = np.random.SeedSequence(cfg.seed)
    streams = [np.random.default_rng(s) for s in root.spawn(H + 1)]
    if cfg.init is None:
        theta = prior.mean + cfg.init_sd * streams[0].standard_normal((H, d))
    else:
        theta = cfg.init.copy()
    rngs = streams[1:]

    base = ChainState(g, spec)
    s_obs = global_stats(g, spec)
    log_prior = np.array([prior.log_density(t) for t in theta])

    T, W = cfg.iterations_per_chain, cfg.warmup
    draws = np.empty((H, T, d))
    acc = np.zeros(H, dtype=np.int64)
    n_ads = T - W
    aux_log = np.empty((H, n_ads, d)) if cfg.keep_aux_stats else None
    aux_flag = np.zeros((H, n_ads), dtype=bool) if cfg.keep_aux_stats else None
    for t in range(T):
        snapshot = theta.copy()
        for h in range(H):
            rng = rngs[h]
            if t < W:
                prop = theta[h] + cfg.block_sd * rng.standard_normal(d)
            else:
                eps = cfg.epsilon_chol @ rng.standard_normal(d)
                prop = ads_propose(snapshot, h, cfg.gamma, eps, rng)
            s_aux = draw_aux_stats(base, prop, rng, cfg.aux)
            lp = prior.log_density(prop)
            la = float((theta[h] - prop) @ (s_aux - s_obs)) + lp - log_prior[h]
            ok = la >= 0 or np.log(rng.random()) < la
            if ok:
                theta[h] = prop
                log_prior[h] = lp
                if t >= W:
                    acc[h] += 1
            if aux_log is not None and t >= W:
                aux_log[h, t - W] = s_aux
                aux_flag[h, t - W] = ok
        draws[:, t] = theta

    chains = []
    for h in range(H):
        rate = acc[h] / n_ads
        chains.append(ChainOutput(
            draws[h, W:].copy(), np.full(d, rate), float(rate),
            None if aux_log is None else aux_log[h],
            None if aux_flag is None else aux_flag[h],
            seed=(cfg.seed, h + 1),
        ))
    return PopulationResult(chains, draws[:, :W].copy(), float(acc.sum() / (H * n_ads)))
