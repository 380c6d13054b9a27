"""End-to-end rates via max-flow / min-cut, with a brute-force cut
enumeration oracle for small instances."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._kernels import dinic
from .linkrate import RateDistribution
from .netmodel import CutSet, Network, RouteSet, subnetwork, validate_route

#: Relative residual threshold below which an arc counts as saturated.
RESIDUAL_RTOL = 1e-12

BRUTE_FORCE_MAX_NODES = 20


class Flooding:
    """Marker for the protocol that uses every network edge."""

    def __repr__(self):
        return "Flooding"


FLOODING = Flooding()


@dataclass(frozen=True)
class FlowResult:
    value: float
    min_cut: CutSet
    per_edge_flow: dict[tuple[int, int], float]  # positive flow u -> v


def _arc_arrays(net: Network, rates: RateDistribution):
    """Two antiparallel arcs per undirected edge; arc i^1 reverses arc i."""
    ends = net.ends
    arc_head = np.empty(2 * net.n_edges, dtype=np.int64)
    arc_head[0::2] = ends[:, 1]
    arc_head[1::2] = ends[:, 0]
    arc_cap = np.repeat(rates.values, 2)
    indptr, nbr, eid = net.csr()
    row = np.repeat(np.arange(net.n_nodes), np.diff(indptr))
    arc_list = 2 * eid + (row != ends[eid, 0])
    return arc_head, arc_cap, indptr, arc_list


def max_flow(net: Network, rates: RateDistribution, a: int, b: int) -> FlowResult:
    """Maximum a-b flow under per-edge capacities, with a witnessing
    minimum cut taken from the residual graph."""
    if a == b:
        raise ValueError("end users must be distinct nodes")
    if rates.net is not net:
        raise ValueError("rate distribution belongs to a different network")
    n = net.n_nodes
    if net.n_edges == 0:
        cut = CutSet(frozenset({a}), frozenset(set(range(n)) - {a}),
                     frozenset())
        return FlowResult(0.0, cut, {})

    arc_head, arc_cap, indptr, arc_list = _arc_arrays(net, rates)
    cap0 = arc_cap.copy()
    eps = RESIDUAL_RTOL * max(1.0, float(arc_cap.max()))
    value = float(dinic(n, a, b, arc_head, arc_cap, indptr, arc_list, eps))

    # residual BFS from the source: crossing edges form the min cut
    reach = np.zeros(n, dtype=bool)
    reach[a] = True
    stack = [a]
    while stack:
        u = stack.pop()
        for k in range(indptr[u], indptr[u + 1]):
            arc = arc_list[k]
            v = arc_head[arc]
            if not reach[v] and arc_cap[arc] > eps:
                reach[v] = True
                stack.append(v)
    side_a = frozenset(np.nonzero(reach)[0].tolist())
    side_b = frozenset(np.nonzero(~reach)[0].tolist())
    ends = net.ends
    crossing = reach[ends[:, 0]] != reach[ends[:, 1]]
    cut_edges = frozenset(
        (int(u), int(v)) for u, v in ends[crossing])

    flows: dict[tuple[int, int], float] = {}
    net_uv = cap0[0::2] - arc_cap[0::2]
    for i in np.nonzero(np.abs(net_uv) > eps)[0]:
        u, v = int(ends[i, 0]), int(ends[i, 1])
        if net_uv[i] > 0:
            flows[(u, v)] = float(net_uv[i])
        else:
            flows[(v, u)] = float(-net_uv[i])
    return FlowResult(value, CutSet(side_a, side_b, cut_edges), flows)


def brute_force_min_cut(net: Network, rates: RateDistribution,
                        a: int, b: int) -> float:
    """Minimum crossing-rate sum over all (a, b) bipartitions.

    Exhaustive 2^(N-2) enumeration; refuses networks too large for it.
    """
    if a == b:
        raise ValueError("end users must be distinct nodes")
    n = net.n_nodes
    if n > BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"{n} nodes exceeds the enumeration limit "
                         f"({BRUTE_FORCE_MAX_NODES})")
    others = [x for x in range(n) if x not in (a, b)]
    best = np.inf
    for size in range(len(others) + 1):
        for extra in combinations(others, size):
            side_a = {a, *extra}
            total = 0.0
            for (u, v), rate in zip(net.edge_list, rates.values):
                if (u in side_a) != (v in side_a):
                    total += rate
            if total < best:
                best = total
    return float(best)


def protocol_rate(net: Network, rates: RateDistribution,
                  pair: tuple[int, int],
                  route_set: RouteSet | Flooding) -> float:
    """End-to-end rate of a deterministic protocol: flooding floods the
    whole network, a route set floods only its edge union."""
    a, b = pair
    if isinstance(route_set, Flooding):
        return max_flow(net, rates, a, b).value
    if route_set.source != a or route_set.target != b:
        raise ValueError("route set endpoints do not match the pair")
    for r in route_set.routes:
        if not validate_route(net, r):
            raise ValueError(f"invalid route {r.nodes} for this network")
    if not route_set.routes:
        return 0.0
    sub = subnetwork(net, route_set.edge_union())
    return max_flow(sub, rates.restrict(sub), a, b).value
