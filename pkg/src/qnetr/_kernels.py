"""Numba kernels for the performance-critical graph searches.

All kernels work on the CSR arrays cached by Network.csr() and are
deterministic: priority ties are broken by smallest node id.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INT = np.int64


@njit(cache=True)
def _heap_push(heap_prio, heap_node, size, prio, node):
    i = size
    heap_prio[i] = prio
    heap_node[i] = node
    while i > 0:
        p = (i - 1) // 2
        if (heap_prio[p] > heap_prio[i]
                or (heap_prio[p] == heap_prio[i]
                    and heap_node[p] > heap_node[i])):
            heap_prio[p], heap_prio[i] = heap_prio[i], heap_prio[p]
            heap_node[p], heap_node[i] = heap_node[i], heap_node[p]
            i = p
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(heap_prio, heap_node, size):
    prio = heap_prio[0]
    node = heap_node[0]
    size -= 1
    heap_prio[0] = heap_prio[size]
    heap_node[0] = heap_node[size]
    i = 0
    while True:
        l, r = 2 * i + 1, 2 * i + 2
        best = i
        if l < size and (heap_prio[l] < heap_prio[best]
                         or (heap_prio[l] == heap_prio[best]
                             and heap_node[l] < heap_node[best])):
            best = l
        if r < size and (heap_prio[r] < heap_prio[best]
                         or (heap_prio[r] == heap_prio[best]
                             and heap_node[r] < heap_node[best])):
            best = r
        if best == i:
            break
        heap_prio[best], heap_prio[i] = heap_prio[i], heap_prio[best]
        heap_node[best], heap_node[i] = heap_node[i], heap_node[best]
        i = best
    return prio, node, size


@njit(cache=True)
def dijkstra_widest(indptr, nbr, eid, rates, source):
    """Max-bottleneck search.  Returns (bottleneck, parent)."""
    n = indptr.shape[0] - 1
    bott = np.full(n, -np.inf)
    parent = np.full(n, -1, INT)
    done = np.zeros(n, np.bool_)
    cap = nbr.shape[0] + n + 1
    heap_prio = np.empty(cap)
    heap_node = np.empty(cap, INT)
    bott[source] = np.inf
    size = _heap_push(heap_prio, heap_node, 0, -np.inf, source)
    while size > 0:
        _, u, size = _heap_pop(heap_prio, heap_node, size)
        if done[u]:
            continue
        done[u] = True
        for k in range(indptr[u], indptr[u + 1]):
            v = nbr[k]
            if done[v]:
                continue
            w = rates[eid[k]]
            cand = bott[u] if bott[u] < w else w
            if cand > bott[v]:
                bott[v] = cand
                parent[v] = u
                size = _heap_push(heap_prio, heap_node, size, -cand, v)
    return bott, parent


@njit(cache=True)
def dijkstra_sum(indptr, nbr, eid, cost, source):
    """Additive-cost search that also records, for every relaxation
    attempt, the aggregated cost of reaching v via u.

    Returns (dist, parent, via) where via is aligned with the CSR slots:
    via[k] is the cost of reaching nbr[k] via the row node of slot k
    (inf where no attempt was made).
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, INT)
    done = np.zeros(n, np.bool_)
    via = np.full(nbr.shape[0], np.inf)
    cap = nbr.shape[0] + n + 1
    heap_prio = np.empty(cap)
    heap_node = np.empty(cap, INT)
    dist[source] = 0.0
    size = _heap_push(heap_prio, heap_node, 0, 0.0, source)
    while size > 0:
        _, u, size = _heap_pop(heap_prio, heap_node, size)
        if done[u]:
            continue
        done[u] = True
        for k in range(indptr[u], indptr[u + 1]):
            v = nbr[k]
            if done[v]:
                continue
            cand = dist[u] + cost[eid[k]]
            via[k] = cand
            if cand < dist[v]:
                dist[v] = cand
                parent[v] = u
                size = _heap_push(heap_prio, heap_node, size, cand, v)
    return dist, parent, via


@njit(cache=True)
def dinic(n, source, sink, arc_head, arc_cap, arc_indptr, arc_list, eps):
    """Max flow on a directed arc list where arc i^1 is the reverse of
    arc i.  Mutates arc_cap into the residual capacities; returns the
    flow value.  Residuals at or below eps count as saturated."""
    level = np.empty(n, INT)
    iter_ptr = np.empty(n, INT)
    queue = np.empty(n, INT)
    stack_arc = np.empty(n, INT)
    total = 0.0
    while True:
        for i in range(n):
            level[i] = -1
        level[source] = 0
        queue[0] = source
        qh, qt = 0, 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for k in range(arc_indptr[u], arc_indptr[u + 1]):
                a = arc_list[k]
                v = arc_head[a]
                if arc_cap[a] > eps and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[sink] < 0:
            break
        for i in range(n):
            iter_ptr[i] = arc_indptr[i]
        v = source
        depth = 0
        while True:
            if v == sink:
                # augment along the stacked arcs
                push = np.inf
                for d in range(depth):
                    a = stack_arc[d]
                    if arc_cap[a] < push:
                        push = arc_cap[a]
                total += push
                retreat = depth
                for d in range(depth):
                    a = stack_arc[d]
                    arc_cap[a] -= push
                    arc_cap[a ^ 1] += push
                    if arc_cap[a] <= eps and d < retreat:
                        retreat = d
                # rewind to the shallowest saturated arc's tail
                depth = retreat
                v = source
                for d in range(depth):
                    v = arc_head[stack_arc[d]]
                continue
            advanced = False
            while iter_ptr[v] < arc_indptr[v + 1]:
                a = arc_list[iter_ptr[v]]
                w = arc_head[a]
                if arc_cap[a] > eps and level[w] == level[v] + 1:
                    stack_arc[depth] = a
                    depth += 1
                    v = w
                    advanced = True
                    break
                iter_ptr[v] += 1
            if advanced:
                continue
            if v == source:
                break
            level[v] = -1
            depth -= 1
            u = source
            for d in range(depth):
                u = arc_head[stack_arc[d]]
            iter_ptr[u] += 1
            v = u
    return total
