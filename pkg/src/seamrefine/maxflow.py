"""Dinic max-flow on a sparse graph with real capacities.

Written for the 4-connected grids produced by :mod:`seamrefine.graphcut`
but accepts any edge list.  Terminal capacities may be ``np.inf`` (hard
constraints).  The returned cut is the *minimal* source set: exactly the
nodes reachable from the source in the final residual graph, which makes
the labeling deterministic when several cuts share the optimal cost.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _dinic(start, head, rev, cap, s, t):
    n = start.shape[0] - 1
    level = np.empty(n, dtype=np.int64)
    cur = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    path = np.empty(n, dtype=np.int64)
    total = 0.0
    while True:
        level[:] = -1
        level[s] = 0
        qh = 0
        qt = 1
        queue[0] = s
        while qh < qt:
            u = queue[qh]
            qh += 1
            for a in range(start[u], start[u + 1]):
                v = head[a]
                if cap[a] > 0.0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[t] < 0:
            break
        for u in range(n):
            cur[u] = start[u]
        # blocking flow: repeated advance/retreat with current-arc pointers
        depth = 0
        u = s
        while True:
            if u == t:
                f = np.inf
                for k in range(depth):
                    if cap[path[k]] < f:
                        f = cap[path[k]]
                for k in range(depth):
                    a = path[k]
                    cap[a] -= f
                    cap[rev[a]] += f
                total += f
                depth = 0
                u = s
                continue
            advanced = False
            while cur[u] < start[u + 1]:
                a = cur[u]
                v = head[a]
                if cap[a] > 0.0 and level[v] == level[u] + 1:
                    path[depth] = a
                    depth += 1
                    u = v
                    advanced = True
                    break
                cur[u] += 1
            if advanced:
                continue
            if u == s:
                break
            level[u] = -1
            depth -= 1
            a = path[depth]
            u = head[rev[a]]
            cur[u] += 1
    # residual reachability from the source
    reach = np.zeros(n, dtype=np.bool_)
    reach[s] = True
    qh = 0
    qt = 1
    queue[0] = s
    while qh < qt:
        u = queue[qh]
        qh += 1
        for a in range(start[u], start[u + 1]):
            v = head[a]
            if cap[a] > 0.0 and not reach[v]:
                reach[v] = True
                queue[qt] = v
                qt += 1
    return total, reach


def solve_min_cut(n_nodes: int, edge_u, edge_v, edge_cap, source_cap, sink_cap):
    """Minimum s-t cut of an undirected graph with terminal links.

    Parameters
    ----------
    n_nodes : int
        Number of non-terminal nodes.
    edge_u, edge_v, edge_cap : array_like
        Undirected edges ``u -- v`` with capacity ``edge_cap`` in both directions.
    source_cap, sink_cap : array_like, shape (n_nodes,)
        Capacities of ``s -> p`` and ``p -> t``.

    Returns
    -------
    flow : float
        Max-flow value (equal to the cut cost).
    source_side : ndarray of bool, shape (n_nodes,)
        True for nodes left on the source side.
    """
    edge_u = np.asarray(edge_u, dtype=np.int64)
    edge_v = np.asarray(edge_v, dtype=np.int64)
    edge_cap = np.asarray(edge_cap, dtype=np.float64)
    source_cap = np.asarray(source_cap, dtype=np.float64)
    sink_cap = np.asarray(sink_cap, dtype=np.float64)
    if np.any(edge_cap < 0) or np.any(source_cap < 0) or np.any(sink_cap < 0):
        raise ValueError("capacities must be nonnegative")
    s, t = n_nodes, n_nodes + 1
    nodes = np.arange(n_nodes, dtype=np.int64)
    src = np.flatnonzero(source_cap > 0)
    snk = np.flatnonzero(sink_cap > 0)
    # arc pairs: (tail, head, cap) and their reverses
    tails = np.concatenate([edge_u, np.full(len(src), s), nodes[snk]])
    heads = np.concatenate([edge_v, nodes[src], np.full(len(snk), t)])
    fwd = np.concatenate([edge_cap, source_cap[src], sink_cap[snk]])
    bwd = np.concatenate([edge_cap, np.zeros(len(src)), np.zeros(len(snk))])
    m = len(tails)
    all_tail = np.concatenate([tails, heads])
    all_head = np.concatenate([heads, tails])
    all_cap = np.concatenate([fwd, bwd])
    partner = np.concatenate([np.arange(m, 2 * m), np.arange(m)])

    order = np.argsort(all_tail, kind="stable")
    pos = np.empty_like(order)
    pos[order] = np.arange(len(order))
    head = all_head[order]
    cap = all_cap[order].copy()
    rev = pos[partner[order]]
    start = np.zeros(n_nodes + 3, dtype=np.int64)
    np.cumsum(np.bincount(all_tail, minlength=n_nodes + 2), out=start[1:])

    flow, reach = _dinic(start, head, rev, cap, s, t)
    return float(flow), reach[:n_nodes].copy()
