"""Sufficient statistics s(y), per-dyad change statistics and model specs."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import _kernels as K
from .graph import Dyad, Graph, shared_partner_matrix

TERM_CODES = {
    "edges": K.EDGES,
    "kstar2": K.KSTAR2,
    "kstar3": K.KSTAR3,
    "triangle": K.TRIANGLE,
    "mutual": K.MUTUAL,
    "ctriple": K.CTRIPLE,
    "gwdegree": K.GWDEGREE,
    "gwesp": K.GWESP,
}
DIRECTED_ONLY = {"mutual", "ctriple"}
UNDIRECTED_ONLY = {"kstar2", "kstar3", "triangle", "gwdegree", "gwesp"}
DECAY_TERMS = {"gwdegree", "gwesp"}

_TERM_RE = re.compile(r"^\s*([a-z0-9_]+)\s*(?:\(\s*([^)]*?)\s*\))?\s*$")


@dataclass(frozen=True)
class StatisticTerm:
    kind: str
    decay: float | None = None

    def __post_init__(self):
        if self.kind not in TERM_CODES:
            raise ValueError(f"unknown statistic term {self.kind!r}")
        if self.kind in DECAY_TERMS:
            if self.decay is None or not np.isfinite(self.decay) or self.decay < 0:
                raise ValueError(f"{self.kind} needs a fixed decay >= 0")
        elif self.decay is not None:
            raise ValueError(f"{self.kind} takes no decay parameter")

    @classmethod
    def parse(cls, text: str) -> "StatisticTerm":
        m = _TERM_RE.match(text.lower())
        if not m:
            raise ValueError(f"cannot parse statistic term {text!r}")
        kind, arg = m.group(1), m.group(2)
        return cls(kind, float(arg) if arg not in (None, "") else None)

    @property
    def label(self) -> str:
        return self.kind if self.decay is None else f"{self.kind}({self.decay:g})"


@dataclass(frozen=True)
class ModelSpec:
    terms: tuple[StatisticTerm, ...]
    directed: bool = False
    codes: np.ndarray = field(init=False, repr=False, compare=False)
    decays: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = tuple(t if isinstance(t, StatisticTerm) else StatisticTerm.parse(t) for t in self.terms)
        if not terms:
            raise ValueError("a model needs at least one term")
        for t in terms:
            if self.directed and t.kind in UNDIRECTED_ONLY:
                raise ValueError(f"term {t.label} requires an undirected graph")
            if not self.directed and t.kind in DIRECTED_ONLY:
                raise ValueError(f"term {t.label} requires a directed graph")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "codes", np.array([TERM_CODES[t.kind] for t in terms], dtype=np.int64))
        object.__setattr__(self, "decays", np.array([t.decay or 0.0 for t in terms], dtype=np.float64))

    @classmethod
    def parse(cls, terms, directed: bool = False) -> "ModelSpec":
        """Build from names like ``"edges + gwesp(0.8)"`` or a list of names."""
        if isinstance(terms, str):
            terms = [t for t in re.split(r"[+,]", terms) if t.strip()]
        return cls(tuple(StatisticTerm.parse(t) if isinstance(t, str) else t for t in terms), directed)

    @property
    def dim(self) -> int:
        return len(self.terms)

    @property
    def labels(self) -> list[str]:
        return [t.label for t in self.terms]

    @property
    def needs_shared_partners(self) -> bool:
        return not self.directed and bool(np.isin(self.codes, [K.TRIANGLE, K.GWESP]).any())

    def index(self, kind: str) -> int:
        for k, t in enumerate(self.terms):
            if t.kind == kind:
                return k
        raise KeyError(kind)

    def check(self, g: Graph) -> None:
        if g.directed != self.directed:
            want = "directed" if self.directed else "undirected"
            raise ValueError(f"model expects a {want} graph")


def _gw_weights(decay: float, upto: int) -> np.ndarray:
    k = np.arange(upto + 1)
    return np.exp(decay) * (1.0 - (1.0 - np.exp(-decay)) ** k)


def global_stats(g: Graph, spec: ModelSpec) -> np.ndarray:
    """Evaluate s(y) for every term of ``spec``."""
    spec.check(g)
    a = g.adj.astype(np.int64)
    out = np.empty(spec.dim)
    cache = {}

    def a3_trace():
        if "a3" not in cache:
            cache["a3"] = int(np.trace(a @ a @ a))
        return cache["a3"]

    for t, term in enumerate(spec.terms):
        kind = term.kind
        if kind == "edges":
            out[t] = g.edge_count
        elif kind == "kstar2":
            out[t] = sum(comb(int(d), 2) for d in g.out_degree)
        elif kind == "kstar3":
            out[t] = sum(comb(int(d), 3) for d in g.out_degree)
        elif kind == "triangle":
            out[t] = a3_trace() // 6
        elif kind == "mutual":
            out[t] = int((a * a.T).sum()) // 2
        elif kind == "ctriple":
            out[t] = a3_trace() // 3
        elif kind == "gwdegree":
            hist = np.bincount(g.out_degree, minlength=g.n)
            out[t] = float(np.dot(_gw_weights(term.decay, g.n - 1)[1:], hist[1:g.n]))
        elif kind == "gwesp":
            sp = shared_partner_matrix(g)
            iu = np.triu_indices(g.n, 1)
            ep = np.bincount(sp[iu][g.adj[iu] == 1], minlength=max(g.n - 1, 1))
            out[t] = float(np.dot(_gw_weights(term.decay, ep.size - 1)[1:], ep[1:]))
    return out


def change_stats(g: Graph, d: Dyad | tuple[int, int], spec: ModelSpec) -> np.ndarray:
    """s(y with d on) - s(y with d off), computed locally."""
    spec.check(g)
    i, j = d
    g._check(i, j)
    out = np.empty(spec.dim)
    sp = _sp_or_dummy(g, spec)
    K.change_vector(g.adj, g.out_degree, g.in_degree, sp, spec.needs_shared_partners,
                    i, j, spec.codes, spec.decays, out)
    return out


def dyad_index(n: int, directed: bool) -> tuple[np.ndarray, np.ndarray]:
    if directed:
        ii, jj = np.nonzero(~np.eye(n, dtype=bool))
    else:
        ii, jj = np.triu_indices(n, 1)
    return ii.astype(np.int64), jj.astype(np.int64)


def change_stats_all(g: Graph, spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Change statistics for every dyad, plus the 0/1 dyad indicators.

    Dyads are ordered as in :func:`dyad_index`.
    """
    spec.check(g)
    ii, jj = dyad_index(g.n, g.directed)
    X = K.change_matrix(g.adj, g.out_degree, g.in_degree, _sp_or_dummy(g, spec),
                        spec.needs_shared_partners, ii, jj, spec.codes, spec.decays)
    return X, g.adj[ii, jj].astype(np.float64)


def _sp_or_dummy(g: Graph, spec: ModelSpec) -> np.ndarray:
    if spec.needs_shared_partners:
        return shared_partner_matrix(g)
    return np.zeros((1, 1), dtype=np.int64)


def conditional_edge_probability(theta, delta) -> float:
    """P(y_ij = 1 | rest) = logistic(theta . delta)."""
    theta = np.asarray(theta, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if theta.shape != delta.shape:
        raise ValueError("theta and change statistics differ in length")
    eta = float(theta @ delta)
    if eta >= 0:
        return 1.0 / (1.0 + np.exp(-eta))
    z = np.exp(eta)
    return z / (1.0 + z)
