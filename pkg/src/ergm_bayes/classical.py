"""Maximum pseudolikelihood and Monte Carlo maximum likelihood estimators.

Both are baselines: MPLE is cheap and often badly off for dependence terms,
and MC-MLE breaks down when the reference parameter sits in a degenerate
region.  The MC-MLE failure checks are reported in ``FitResult.diagnostics``
rather than raised.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logsumexp

from .graph import Graph
from .sampler import ChainState, SamplerConfig, as_rng, draw_aux_stats
from .statistics import ModelSpec, change_stats_all, global_stats

TRUST_RADIUS = 20.0
MIN_WEIGHT_ESS = 5.0
SEPARATION_INFO = 1e-8


@dataclass
class FitResult:
    estimate: np.ndarray
    std_errors: np.ndarray | None
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        se = None if self.std_errors is None else [float(v) for v in self.std_errors]
        return {
            "estimate": [float(v) for v in self.estimate],
            "std_errors": se,
            "converged": bool(self.converged),
            "diagnostics": self.diagnostics,
        }


def _safe_inverse(info: np.ndarray) -> np.ndarray | None:
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(cov)) or np.any(np.diag(cov) < 0):
        return None
    return cov


def mple(g: Graph, spec: ModelSpec, max_iter: int = 50, tol: float = 1e-8) -> FitResult:
    """Logistic regression of dyad indicators on their change statistics.

    Newton-Raphson from zero, stopping when the gradient max-norm drops
    below ``tol``.  Standard errors come from the inverse observed
    information at the optimum.
    """
    X, y = change_stats_all(g, spec)
    theta = np.zeros(spec.dim)
    info = np.zeros((spec.dim, spec.dim))
    grad_norm = np.inf
    msg = ""
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(X @ theta)
        grad = X.T @ (y - p)
        info = (X * (p * (1 - p))[:, None]).T @ X
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm < tol:
            break
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError:
            msg = "singular information matrix (separation or constant change statistic)"
            break
        theta = theta + step
        if not np.all(np.isfinite(theta)) or np.max(np.abs(theta)) > 1e6:
            msg = "estimate diverged (data separable)"
            break
    else:
        # last step never re-checked the gradient
        p = expit(X @ theta)
        grad_norm = float(np.max(np.abs(X.T @ (y - p))))
        info = (X * (p * (1 - p))[:, None]).T @ X

    if not msg and grad_norm < tol:
        # a drifting estimate under separation also shrinks the gradient;
        # it shows up as vanishing information per dyad
        if np.linalg.eigvalsh(info)[0] / max(len(y), 1) < SEPARATION_INFO:
            msg = "information vanishes at the estimate (data separable)"
    converged = grad_norm < tol and not msg
    if not converged and not msg:
        msg = f"no convergence after {max_iter} iterations"
    cov = _safe_inverse(info) if converged else None
    se = None if cov is None else np.sqrt(np.diag(cov))
    if converged and se is None:
        converged = False
        msg = "information matrix not invertible at the optimum"
    diag = {"iterations": it, "gradient_norm": grad_norm}
    if msg:
        diag["message"] = msg
    return FitResult(theta, se, converged, diag)


class LogRatio:
    """Importance-sampled log likelihood ratio relative to a reference point.

    ``value(theta)`` is ``(theta - theta0) . s_obs - log mean exp((theta - theta0) . s_i)``
    for the simulated statistics ``s_i`` drawn at ``theta0``.  It is concave
    and has a finite maximizer only when ``s_obs`` lies inside the convex
    hull of the ``s_i``.
    """

    def __init__(self, theta0, s_obs, sample_stats):
        self.theta0 = np.asarray(theta0, dtype=float)
        self.s_obs = np.asarray(s_obs, dtype=float)
        self.sample = np.asarray(sample_stats, dtype=float)
        if self.sample.ndim != 2 or self.sample.shape[0] < 2:
            raise ValueError("need at least two simulated statistic vectors")

    def _log_weights(self, theta):
        lw = self.sample @ (np.asarray(theta, dtype=float) - self.theta0)
        return lw - logsumexp(lw)

    def value(self, theta) -> float:
        dt = np.asarray(theta, dtype=float) - self.theta0
        lw = self.sample @ dt
        return float(dt @ self.s_obs - (logsumexp(lw) - np.log(lw.size)))

    def weights(self, theta) -> np.ndarray:
        return np.exp(self._log_weights(theta))

    def gradient(self, theta) -> np.ndarray:
        return self.s_obs - self.weights(theta) @ self.sample

    def hessian(self, theta) -> np.ndarray:
        w = self.weights(theta)
        mu = w @ self.sample
        c = self.sample - mu
        return -(c * w[:, None]).T @ c

    def weight_ess(self, theta) -> float:
        w = self.weights(theta)
        return float(1.0 / np.sum(w * w))

    def outside_range(self) -> np.ndarray:
        """Coordinates where ``s_obs`` is outside the sampled [min, max]."""
        return (self.s_obs < self.sample.min(axis=0)) | (self.s_obs > self.sample.max(axis=0))


def simulate_reference_stats(g: Graph, spec: ModelSpec, theta0, m: int, cfg: SamplerConfig,
                             rng=None) -> np.ndarray:
    """``m`` independent sampler runs at ``theta0`` started from ``g``; returns their s(y)."""
    if m < 2:
        raise ValueError("m must be at least 2")
    rng = as_rng(rng, cfg.seed)
    base = ChainState(g, spec)
    theta0 = np.asarray(theta0, dtype=float)
    return np.array([draw_aux_stats(base, theta0, rng, cfg) for _ in range(m)])


def mcmle(g: Graph, spec: ModelSpec, theta0, m: int = 1000, cfg: SamplerConfig | None = None,
          rng=None, max_iter: int = 100, tol: float = 1e-8, sample_stats=None) -> FitResult:
    """Maximize the importance-sampled log likelihood ratio by damped Newton.

    Failure (``converged=False``, no standard errors) is declared when the
    iterate leaves the trust radius around ``theta0``, when the effective
    number of importance weights drops below five, or when the observed
    statistics are outside the sampled range in some coordinate.
    """
    cfg = cfg or SamplerConfig()
    theta0 = np.asarray(theta0, dtype=float)
    if sample_stats is None:
        sample_stats = simulate_reference_stats(g, spec, theta0, m, cfg, rng)
    lr = LogRatio(theta0, global_stats(g, spec), sample_stats)

    reasons = []
    outside = lr.outside_range()
    if outside.any():
        bad = [spec.labels[k] for k in np.nonzero(outside)[0]]
        reasons.append("observed statistics outside sampled range: " + ", ".join(bad))

    theta = theta0.copy()
    f = lr.value(theta)
    grad_norm = float(np.max(np.abs(lr.gradient(theta))))
    it = 0
    for it in range(1, max_iter + 1):
        grad = lr.gradient(theta)
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm < tol:
            break
        H = lr.hessian(theta)
        try:
            step = np.linalg.solve(-H, grad)
        except np.linalg.LinAlgError:
            reasons.append("singular weighted covariance")
            break
        # halve until the objective stops decreasing
        for _ in range(10):
            cand = theta + step
            fc = lr.value(cand)
            if np.isfinite(fc) and fc >= f:
                break
            step = step / 2
        theta, f = cand, fc
        if np.linalg.norm(theta - theta0) > TRUST_RADIUS:
            reasons.append(f"estimate left the trust radius {TRUST_RADIUS:g} around theta0")
            break
    else:
        grad_norm = float(np.max(np.abs(lr.gradient(theta))))
        if grad_norm >= tol:
            reasons.append(f"no convergence after {max_iter} iterations")

    m_eff = lr.weight_ess(theta)
    if m_eff < MIN_WEIGHT_ESS:
        reasons.append(f"importance weight ESS {m_eff:.3g} below {MIN_WEIGHT_ESS:g}")

    cov = _safe_inverse(-lr.hessian(theta))
    raw_se = None if cov is None else np.sqrt(np.diag(cov))
    converged = not reasons
    diag = {
        "iterations": it,
        "gradient_norm": grad_norm,
        "weight_ess": m_eff,
        "sample_size": int(lr.sample.shape[0]),
        "failures": reasons,
        # kept for inspection even when the fit is declared failed
        "raw_std_errors": None if raw_se is None else [float(v) for v in raw_se],
    }
    return FitResult(theta, raw_se if converged else None, converged, diag)


def log_ratio_surface(g: Graph, spec: ModelSpec, theta0, m: int, cfg: SamplerConfig, grid,
                      rng=None, sample_stats=None) -> list[tuple[np.ndarray, float]]:
    """Evaluate the log likelihood ratio at every grid point from one shared sample."""
    grid = [np.asarray(t, dtype=float) for t in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    if sample_stats is None:
        sample_stats = simulate_reference_stats(g, spec, theta0, m, cfg, rng)
    lr = LogRatio(theta0, global_stats(g, spec), sample_stats)
    return [(t, lr.value(t)) for t in grid]


def grid_has_interior_maximum(values: np.ndarray) -> bool:
    """True when the maximum of a gridded surface is not on the grid border.

    ``values`` is a 1-D or 2-D array of surface values on a rectangular grid.
    """
    v = np.asarray(values, dtype=float)
    idx = np.unravel_index(np.nanargmax(v), v.shape)
    return all(0 < k < s - 1 for k, s in zip(idx, v.shape))
