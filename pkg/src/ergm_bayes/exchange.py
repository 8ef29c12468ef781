"""Exchange-algorithm MCMC for the ERGM posterior.

The intractable normalizing constants cancel because every proposed
parameter comes with an auxiliary graph simulated at that parameter.  The
auxiliary chain always restarts from the observed graph.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .sampler import ChainState, SamplerConfig, as_rng, draw_aux_stats
from .statistics import ModelSpec, global_stats


@dataclass
class Prior:
    """Multivariate normal prior on theta."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.asarray(self.covariance, dtype=float)
        if cov.ndim == 0:
            cov = cov * np.eye(self.mean.size)
        if cov.shape != (self.mean.size, self.mean.size):
            raise ValueError("prior covariance shape does not match the mean")
        if not np.allclose(cov, cov.T):
            raise ValueError("prior covariance must be symmetric")
        try:
            self._chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError("prior covariance must be positive definite") from exc
        self.covariance = cov
        self._logdet = 2.0 * np.sum(np.log(np.diag(self._chol)))

    @classmethod
    def isotropic(cls, dim: int, variance: float = 30.0, mean=None) -> "Prior":
        m = np.zeros(dim) if mean is None else mean
        return cls(m, variance * np.eye(dim))

    @property
    def dim(self) -> int:
        return self.mean.size

    def log_density(self, theta) -> float:
        diff = np.asarray(theta, dtype=float) - self.mean
        z = np.linalg.solve(self._chol, diff)
        return float(-0.5 * (z @ z) - 0.5 * self._logdet - 0.5 * self.dim * np.log(2 * np.pi))


@dataclass
class ExchangeConfig:
    main_iterations: int = 30000
    aux: SamplerConfig = field(default_factory=SamplerConfig)
    proposal_sd: np.ndarray | None = None
    init: np.ndarray | None = None
    seed: int | None = None
    keep_aux_stats: bool = False

    def __post_init__(self):
        if int(self.main_iterations) < 1:
            raise ValueError("main_iterations must be >= 1")
        self.main_iterations = int(self.main_iterations)
        if self.proposal_sd is not None:
            self.proposal_sd = np.atleast_1d(np.asarray(self.proposal_sd, dtype=float))
            if np.any(self.proposal_sd <= 0) or not np.all(np.isfinite(self.proposal_sd)):
                raise ValueError("proposal scales must be positive")


@dataclass
class ChainOutput:
    """Draws of one chain plus acceptance bookkeeping.

    ``aux_stats`` rows are s(y') of every auxiliary draw and ``aux_accepted``
    flags whether that proposal was accepted; both are ``None`` unless
    requested.
    """

    draws: np.ndarray
    acceptance: np.ndarray
    overall_acceptance: float
    aux_stats: np.ndarray | None = None
    aux_accepted: np.ndarray | None = None
    seed: object = None


def exchange_log_alpha(theta, theta_new, s_obs, s_aux, prior: Prior) -> float:
    """Log acceptance ratio of the exchange move (uncapped)."""
    theta = np.asarray(theta, dtype=float)
    theta_new = np.asarray(theta_new, dtype=float)
    s_obs = np.asarray(s_obs, dtype=float)
    s_aux = np.asarray(s_aux, dtype=float)
    if not (theta.shape == theta_new.shape == s_obs.shape == s_aux.shape):
        raise ValueError("dimension mismatch")
    return float((theta - theta_new) @ (s_aux - s_obs)
                 + prior.log_density(theta_new) - prior.log_density(theta))


def _accept(log_alpha: float, rng: np.random.Generator) -> bool:
    return log_alpha >= 0 or np.log(rng.random()) < log_alpha


def run_exchange(g: Graph, spec: ModelSpec, prior: Prior, cfg: ExchangeConfig, rng=None) -> ChainOutput:
    """Single-site exchange sampler.

    Each sweep updates the components in order; every component update
    draws its own auxiliary graph.  One row of ``draws`` per sweep.
    """
    d = spec.dim
    if prior.dim != d:
        raise ValueError("prior dimension does not match the model")
    sd = np.ones(d) if cfg.proposal_sd is None else cfg.proposal_sd
    if sd.size != d:
        raise ValueError("proposal_sd length does not match the model")
    rng = as_rng(rng, cfg.seed)
    base = ChainState(g, spec)
    s_obs = global_stats(g, spec)
    theta = np.zeros(d) if cfg.init is None else np.asarray(cfg.init, dtype=float).copy()
    if theta.shape != (d,):
        raise ValueError("init length does not match the model")
    log_prior = prior.log_density(theta)

    T = cfg.main_iterations
    draws = np.empty((T, d))
    acc = np.zeros(d, dtype=np.int64)
    aux_log = np.empty((T * d, d)) if cfg.keep_aux_stats else None
    aux_flag = np.zeros(T * d, dtype=bool) if cfg.keep_aux_stats else None
    row = 0
    for t in range(T):
        for k in range(d):
            prop = theta.copy()
            prop[k] += sd[k] * rng.standard_normal()
            s_aux = draw_aux_stats(base, prop, rng, cfg.aux)
            lp_new = prior.log_density(prop)
            la = float((theta - prop) @ (s_aux - s_obs)) + lp_new - log_prior
            ok = _accept(la, rng)
            if ok:
                theta, log_prior = prop, lp_new
                acc[k] += 1
            if aux_log is not None:
                aux_log[row] = s_aux
                aux_flag[row] = ok
            row += 1
        draws[t] = theta
    return ChainOutput(draws, acc / T, float(acc.sum() / (T * d)), aux_log, aux_flag, cfg.seed)


@dataclass
class DegeneracyReport:
    n_draws: int
    empty: float
    complete: float
    near_empty: float
    near_complete: float
    n_accepted: int
    accepted_empty: float
    accepted_complete: float
    accepted_near_empty: float
    accepted_near_complete: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def degeneracy_monitor(aux_stats, n: int, accepted=None, directed: bool = False,
                       edges_index: int = 0, tolerance: float = 0.05) -> DegeneracyReport:
    """How often auxiliary graphs are empty, complete or within ``tolerance`` of either.

    ``tolerance`` is a fraction of the dyad count.  Fractions among accepted
    proposals are NaN when nothing was accepted.
    """
    stats = np.atleast_2d(np.asarray(aux_stats, dtype=float))
    if stats.shape[0] == 0:
        raise ValueError("auxiliary log is empty")
    edges = stats[:, edges_index]
    n_dyads = n * (n - 1) if directed else n * (n - 1) // 2
    dens = edges / n_dyads
    flags = {
        "empty": edges == 0,
        "complete": edges == n_dyads,
        "near_empty": dens <= tolerance,
        "near_complete": dens >= 1 - tolerance,
    }
    acc = np.zeros(edges.size, dtype=bool) if accepted is None else np.asarray(accepted, dtype=bool)
    n_acc = int(acc.sum())

    def frac(mask, sel=None):
        if sel is None:
            return float(mask.mean())
        return float(mask[sel].mean()) if sel.any() else float("nan")

    return DegeneracyReport(
        int(edges.size),
        *(frac(f) for f in flags.values()),
        n_acc,
        *(frac(f, acc) for f in flags.values()),
    )
