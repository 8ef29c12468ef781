"""Compiled inner loops: per-dyad change statistics and the dyad MH chain.

Term codes must stay in sync with ``statistics.TERM_CODES``.
"""
import numpy as np
from numba import njit

# Hot helpers take many array arguments; with reference counting enabled
# every call pays an incref/decref per array (~100ns per step).  They never
# allocate, so they are compiled without the runtime.
try:
    hot = njit(cache=True, nogil=True, _nrt=False)
except TypeError:  # pragma: no cover - flag removed in a future numba
    hot = njit(cache=True, nogil=True)

EDGES = 0
KSTAR2 = 1
KSTAR3 = 2
TRIANGLE = 3
MUTUAL = 4
CTRIPLE = 5
GWDEGREE = 6
GWESP = 7

PROPOSAL_TNT = 0
PROPOSAL_UNIFORM = 1


@hot
def _ipow(r, k):
    # float ** int in numba bloats the caller enough to cost ~80ns per call
    out = 1.0
    for _ in range(k):
        out *= r
    return out


@hot
def _common_neighbours(adj, i, j):
    n = adj.shape[0]
    c = 0
    for k in range(n):
        if adj[i, k] and adj[j, k]:
            c += 1
    return c


@hot
def change_vector(adj, deg_out, deg_in, sp, use_sp, i, j, codes, decays, out):
    """Write s(y with ij on) - s(y with ij off) into ``out``.

    ``sp`` holds common-neighbour counts and is read only when ``use_sp``.
    The current state of the dyad may be on or off; everything is
    expressed relative to the off state.
    """
    y = adj[i, j]
    for t in range(codes.shape[0]):
        c = codes[t]
        if c == EDGES:
            out[t] = 1.0
        elif c == KSTAR2:
            out[t] = (deg_out[i] - y) + (deg_out[j] - y)
        elif c == KSTAR3:
            di = deg_out[i] - y
            dj = deg_out[j] - y
            out[t] = di * (di - 1) // 2 + dj * (dj - 1) // 2
        elif c == TRIANGLE:
            if use_sp:
                out[t] = sp[i, j]
            else:
                out[t] = _common_neighbours(adj, i, j)
        elif c == MUTUAL:
            out[t] = adj[j, i]
        elif c == CTRIPLE:
            n = adj.shape[0]
            cnt = 0
            for k in range(n):
                if adj[j, k] and adj[k, i]:
                    cnt += 1
            out[t] = cnt
        elif c == GWDEGREE:
            r = 1.0 - np.exp(-decays[t])
            out[t] = _ipow(r, deg_out[i] - y) + _ipow(r, deg_out[j] - y)
        elif c == GWESP:
            phi = decays[t]
            r = 1.0 - np.exp(-phi)
            n = adj.shape[0]
            if use_sp:
                sij = sp[i, j]
            else:
                sij = _common_neighbours(adj, i, j)
            acc = np.exp(phi) * (1.0 - _ipow(r, sij))
            for k in range(n):
                if adj[i, k] and adj[j, k]:
                    if use_sp:
                        sik = sp[i, k] - y
                        sjk = sp[j, k] - y
                    else:
                        sik = _common_neighbours(adj, i, k) - y
                        sjk = _common_neighbours(adj, j, k) - y
                    acc += _ipow(r, sik) + _ipow(r, sjk)
            out[t] = acc
        else:
            out[t] = np.nan


@njit(cache=True, nogil=True)
def change_matrix(adj, deg_out, deg_in, sp, use_sp, dyad_i, dyad_j, codes, decays):
    m = dyad_i.shape[0]
    res = np.empty((m, codes.shape[0]))
    buf = np.empty(codes.shape[0])
    for k in range(m):
        change_vector(adj, deg_out, deg_in, sp, use_sp, dyad_i[k], dyad_j[k], codes, decays, buf)
        res[k, :] = buf
    return res


LOG_HALF = np.log(0.5)


@hot
def _log_select(n_edges, n_dyads, removing, logk):
    # log probability that TNT picks one particular dyad of the chosen kind
    if removing:
        return (LOG_HALF if n_edges < n_dyads else 0.0) - logk[n_edges]
    return (LOG_HALF if n_edges > 0 else 0.0) - logk[n_dyads - n_edges]


@hot
def _tnt_log_hastings(n_edges, n_dyads, removing, logk):
    if removing:
        fwd = _log_select(n_edges, n_dyads, True, logk)
        rev = _log_select(n_edges - 1, n_dyads, False, logk)
    else:
        fwd = _log_select(n_edges, n_dyads, False, logk)
        rev = _log_select(n_edges + 1, n_dyads, True, logk)
    return rev - fwd


@njit(cache=True, nogil=True)
def tnt_log_hastings(n_edges, n_dyads, removing):
    """log q(y | y') - log q(y' | y) for a TNT toggle from a graph with ``n_edges``."""
    logk = np.log(np.arange(n_dyads + 1).astype(np.float64))
    return _tnt_log_hastings(n_edges, n_dyads, removing, logk)


@hot
def apply_toggle(adj, deg_out, deg_in, sp, use_sp, directed, perm, where, state, i, j, dyad):
    """Flip dyad ``(i, j)`` and keep every cache coherent.

    ``state[0]`` is the edge count.  ``perm[:E]`` lists edge dyad ids and
    ``perm[E:]`` empty dyad ids, ``where`` is its inverse.
    """
    n = adj.shape[0]
    e = state[0]
    pos = where[dyad]
    if adj[i, j]:
        # move to the boundary slot E-1, then shrink the edge block
        other = perm[e - 1]
        perm[pos] = other
        where[other] = pos
        perm[e - 1] = dyad
        where[dyad] = e - 1
        state[0] = e - 1
        adj[i, j] = 0
        if directed:
            deg_out[i] -= 1
            deg_in[j] -= 1
        else:
            adj[j, i] = 0
            deg_out[i] -= 1
            deg_out[j] -= 1
            if use_sp:
                for k in range(n):
                    if adj[j, k]:
                        sp[i, k] -= 1
                        sp[k, i] -= 1
                    if adj[i, k]:
                        sp[j, k] -= 1
                        sp[k, j] -= 1
    else:
        other = perm[e]
        perm[pos] = other
        where[other] = pos
        perm[e] = dyad
        where[dyad] = e
        state[0] = e + 1
        if not directed and use_sp:
            for k in range(n):
                if adj[j, k]:
                    sp[i, k] += 1
                    sp[k, i] += 1
                if adj[i, k]:
                    sp[j, k] += 1
                    sp[k, j] += 1
        adj[i, j] = 1
        if directed:
            deg_out[i] += 1
            deg_in[j] += 1
        else:
            adj[j, i] = 1
            deg_out[i] += 1
            deg_out[j] += 1


@hot
def run_chain(adj, deg_out, deg_in, sp, use_sp, directed, perm, where, state,
              dyad_i, dyad_j, codes, decays, theta, stats, uniforms, proposal,
              record_every, trace, code_trace, delta, logk):
    """Run ``uniforms.shape[0]`` Metropolis-Hastings dyad proposals in place.

    ``stats`` holds s(y) for the starting graph and is advanced by the
    accepted change statistics.  ``state[1]`` carries the dyad bit code of
    the current graph (meaningful only for fewer than 63 dyads).
    ``delta`` is scratch of length d and ``logk[k] = log(k)`` for
    ``k = 0..n_dyads``.  Returns the number of accepted proposals.
    """
    n_dyads = dyad_i.shape[0]
    d = codes.shape[0]
    accepted = 0
    row = 0
    for t in range(uniforms.shape[0]):
        e = state[0]
        if proposal == PROPOSAL_TNT:
            if e == 0:
                removing = False
            elif e == n_dyads:
                removing = True
            else:
                removing = uniforms[t, 0] < 0.5
            if removing:
                k = int(uniforms[t, 1] * e)
                if k >= e:
                    k = e - 1
                dyad = perm[k]
            else:
                k = int(uniforms[t, 1] * (n_dyads - e))
                if k >= n_dyads - e:
                    k = n_dyads - e - 1
                dyad = perm[e + k]
            log_h = _tnt_log_hastings(e, n_dyads, removing, logk)
        else:
            dyad = int(uniforms[t, 1] * n_dyads)
            if dyad >= n_dyads:
                dyad = n_dyads - 1
            log_h = 0.0
        i = dyad_i[dyad]
        j = dyad_j[dyad]
        on = adj[i, j] == 1
        change_vector(adj, deg_out, deg_in, sp, use_sp, i, j, codes, decays, delta)
        eta = 0.0
        for q in range(d):
            eta += theta[q] * delta[q]
        log_alpha = (-eta if on else eta) + log_h
        if log_alpha >= 0.0 or np.log(uniforms[t, 2]) < log_alpha:
            apply_toggle(adj, deg_out, deg_in, sp, use_sp, directed, perm, where, state, i, j, dyad)
            sign = -1.0 if on else 1.0
            for q in range(d):
                stats[q] += sign * delta[q]
            if dyad < 63:
                state[1] ^= np.int64(1) << dyad
            accepted += 1
        if record_every > 0 and (t + 1) % record_every == 0:
            for q in range(d):
                trace[row, q] = stats[q]
            code_trace[row] = state[1]
            row += 1
    return accepted
