"""Posterior-predictive goodness of fit on unmodelled topology summaries.

Graphs are simulated at thinned posterior draws and their degree,
edgewise shared-partner and geodesic distributions are compared with the
observed graph through 5/50/95% simulation bands.  All summaries are
proportions: of nodes, of edges, or of ordered/unordered node pairs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, geodesic_distribution
from .sampler import ChainState, SamplerConfig, draw_aux_graph
from .statistics import ModelSpec

BAND = (5.0, 50.0, 95.0)


@dataclass
class GofFamily:
    bins: list
    observed: np.ndarray
    p5: np.ndarray
    p50: np.ndarray
    p95: np.ndarray
    simulated: np.ndarray = field(repr=False)

    def inside(self) -> np.ndarray:
        return (self.observed >= self.p5) & (self.observed <= self.p95)

    def occupied(self) -> np.ndarray:
        return (self.observed > 0) | (self.p95 > 0)


@dataclass
class GofReport:
    families: dict[str, GofFamily]
    thetas: np.ndarray

    def coverage(self, occupied_only: bool = True) -> float:
        """Fraction of bins whose observed value lies within [p5, p95]."""
        hit, tot = 0, 0
        for fam in self.families.values():
            mask = fam.occupied() if occupied_only else np.ones(len(fam.bins), dtype=bool)
            hit += int(fam.inside()[mask].sum())
            tot += int(mask.sum())
        return hit / tot if tot else float("nan")

    def rows(self):
        for name, fam in self.families.items():
            for k, b in enumerate(fam.bins):
                yield name, b, fam.observed[k], fam.p5[k], fam.p50[k], fam.p95[k]


def _degree_props(deg: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(deg, minlength=n)[:n] / n


def _esp_props(g: Graph) -> np.ndarray:
    """Edgewise shared partners; outgoing two-paths i->k->j for directed edges i->j."""
    a = g.adj.astype(np.int64)
    if g.directed:
        sp = a @ a
        vals = sp[a == 1]
    else:
        sp = a @ a
        iu = np.triu_indices(g.n, 1)
        vals = sp[iu][a[iu] == 1]
    size = max(g.n - 1, 1)
    if vals.size == 0:
        return np.zeros(size)
    return np.bincount(vals, minlength=size)[:size] / vals.size


def _geodesic_props(g: Graph) -> np.ndarray:
    counts = geodesic_distribution(g).astype(float)
    total = counts.sum()
    return counts / total if total else counts


def summaries(g: Graph) -> dict[str, np.ndarray]:
    """Full-length summary vectors used by :func:`bayesian_gof`."""
    out = {}
    if g.directed:
        out["indegree"] = _degree_props(g.in_degree, g.n)
        out["outdegree"] = _degree_props(g.out_degree, g.n)
    else:
        out["degree"] = _degree_props(g.out_degree, g.n)
    out["esp"] = _esp_props(g)
    out["geodesic"] = _geodesic_props(g)
    return out


def _bin_labels(name: str, n: int) -> list:
    if name == "geodesic":
        return [str(k) for k in range(1, n)] + ["inf"]
    return [str(k) for k in range(n if name != "esp" else max(n - 1, 1))]


def thin_indices(total: int, count: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be positive")
    if count > total:
        raise ValueError(f"count {count} exceeds the {total} available draws")
    return np.unique(np.linspace(0, total - 1, count).round().astype(np.int64))


def bayesian_gof(g: Graph, spec: ModelSpec, draws, count: int = 100, aux: SamplerConfig | None = None,
                 seed=None) -> GofReport:
    """Simulate one graph per thinned posterior draw and band the summaries.

    Degree and shared-partner bins are trimmed to the largest value seen in
    either the observed or any simulated graph; geodesic bins always include
    the unreachable bin so proportions sum to one.
    """
    aux = aux or SamplerConfig()
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if draws.shape[0] == 0:
        raise ValueError("no posterior draws")
    if draws.shape[1] != spec.dim:
        raise ValueError("draws do not match the model dimension")
    idx = thin_indices(draws.shape[0], count)
    if idx.size < count:
        raise ValueError(f"cannot thin {draws.shape[0]} draws into {count} distinct ones")
    thetas = draws[idx]
    base = ChainState(g, spec)
    seqs = np.random.SeedSequence(seed).spawn(count)
    obs = summaries(g)
    sims = {k: np.empty((count, v.size)) for k, v in obs.items()}
    for t, (theta, ss) in enumerate(zip(thetas, seqs)):
        y = draw_aux_graph(base, theta, np.random.default_rng(ss), aux)
        for k, v in summaries(y).items():
            sims[k][t] = v

    families = {}
    for name, ov in obs.items():
        sv = sims[name]
        labels = _bin_labels(name, g.n)
        if name != "geodesic":
            used = np.nonzero((ov > 0) | (sv > 0).any(axis=0))[0]
            top = int(used[-1]) + 1 if used.size else 1
            ov, sv, labels = ov[:top], sv[:, :top], labels[:top]
        p5, p50, p95 = np.percentile(sv, BAND, axis=0)
        families[name] = GofFamily(labels, ov, p5, p50, p95, sv)
    return GofReport(families, thetas)
