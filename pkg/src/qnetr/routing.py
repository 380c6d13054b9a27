"""Route construction: the generalized Dijkstra family, the one-shot
multiple-disjoint-path algorithm with the inverse-accumulated-rate cost,
the iterative disjoint Dijkstra baseline, and the protocol drivers."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from ._kernels import dijkstra_sum, dijkstra_widest
from .flow import FLOODING, Flooding, max_flow, protocol_rate
from .linkrate import RateDistribution
from .netmodel import Network, Route, RouteSet


@dataclass(frozen=True)
class CostFunction:
    """Tentative-cost specification for the generalized Dijkstra search.

    ``tentative(T_x, T_y, props)`` evaluates the cost of reaching y via
    x, where props carries the edge's point-to-point properties.
    """

    mode: str  # "minimize" | "maximize"
    init_source: float
    init_other: float
    tentative: Callable[[float, float, dict], float]

    def __post_init__(self):
        if self.mode not in ("minimize", "maximize"):
            raise ValueError("mode must be 'minimize' or 'maximize'")

    def better(self, a: float, b: float) -> bool:
        return a < b if self.mode == "minimize" else a > b


def shortest_path_cost() -> CostFunction:
    return CostFunction("minimize", 0.0, math.inf,
                        lambda tx, ty, props: tx + props["length"])


def widest_path_cost() -> CostFunction:
    return CostFunction("maximize", math.inf, -math.inf,
                        lambda tx, ty, props: max(ty, min(tx, props["rate"])))


@dataclass(frozen=True)
class IarParams:
    """Inverse-accumulated-rate cost: each edge costs K^(-eta) + epsilon."""

    eta: float = 5.0
    epsilon_use: float = 1.0

    def __post_init__(self):
        if self.eta < 0 or self.epsilon_use < 0:
            raise ValueError("IAR parameters must be non-negative")


def iar_cost(p: IarParams = IarParams()) -> CostFunction:
    return CostFunction(
        "minimize", 0.0, math.inf,
        lambda tx, ty, props: tx + props["rate"] ** -p.eta + p.epsilon_use)


def general_dijkstra(net: Network, cost: CostFunction, s: int, t: int,
                     rates: RateDistribution | None = None) -> Optional[Route]:
    """Greedy priority-queue search under an arbitrary tentative cost.

    Ties in the queue are broken by smallest node id.  Returns the
    optimal route, or None if the target is unreachable.
    """
    if s == t:
        raise ValueError("source and target must differ")
    n = net.n_nodes
    tcost = [cost.init_other] * n
    tcost[s] = cost.init_source
    parent = [-1] * n
    done = [False] * n
    sign = 1.0 if cost.mode == "minimize" else -1.0
    heap = [(sign * tcost[s], s)]
    while heap:
        _, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == t:
            break
        for v in net.adjacency[u]:
            if done[v]:
                continue
            props = {"length": net.edge_length(u, v),
                     "rate": rates[(u, v)] if rates is not None else None}
            a = cost.tentative(tcost[u], tcost[v], props)
            if cost.better(a, tcost[v]):
                tcost[v] = a
                parent[v] = u
                heapq.heappush(heap, (sign * a, v))
    if parent[t] == -1:
        return None
    nodes = [t]
    while nodes[-1] != s:
        nodes.append(parent[nodes[-1]])
    return Route(tuple(reversed(nodes)))


def single_path_rate(net: Network, rates: RateDistribution,
                     pair: tuple[int, int]) -> tuple[Optional[Route], float]:
    """Widest route between the pair and its bottleneck rate."""
    a, b = pair
    if a == b:
        raise ValueError("end users must be distinct nodes")
    if net.n_edges == 0:
        return None, 0.0
    indptr, nbr, eid = net.csr()
    bott, parent = dijkstra_widest(indptr, nbr, eid, rates.values, a)
    if parent[b] < 0:
        return None, 0.0
    nodes = [b]
    while nodes[-1] != a:
        nodes.append(int(parent[nodes[-1]]))
    return Route(tuple(reversed(nodes))), float(bott[b])


@dataclass
class CostMatrix:
    """Aggregated-cost table from a single exploration sweep.

    The diagonal holds the best-known cost from the source to each node;
    off-diagonal entries hold the cost of reaching a node via a specific
    neighbor, recorded for every relaxation attempt (optimal or not).
    """

    net: Network
    source: int
    diag: np.ndarray              # per node
    parent: np.ndarray            # per node
    via: np.ndarray               # per CSR slot: cost of nbr[k] via row node
    edge_cost: np.ndarray         # per edge id

    def via_cost(self, x: int, y: int) -> float:
        """Aggregated cost of reaching y via x.

        Defined for every edge (x, y) whose tail x was reached by the
        sweep: the cost to x plus the edge's own cost.  Infinite when x
        was never reached or the edge does not exist.
        """
        if not self.net.has_edge(x, y):
            return math.inf
        if not math.isfinite(self.diag[x]):
            return math.inf
        return float(self.diag[x] + self.edge_cost[self.net.edge_id(x, y)])

    def via_entries(self) -> dict[tuple[int, int], float]:
        """The entries actually recorded during relaxation attempts."""
        indptr, nbr, _ = self.net.csr()
        out = {}
        for x in range(self.net.n_nodes):
            for k in range(indptr[x], indptr[x + 1]):
                if math.isfinite(self.via[k]):
                    out[(x, int(nbr[k]))] = float(self.via[k])
        return out


def mdp_explore(net: Network, rates: RateDistribution,
                iar: IarParams, s: int) -> CostMatrix:
    """One Dijkstra-like sweep under the IAR cost, keeping every
    aggregated cost rather than only the per-node optimum."""
    if net.n_edges and float(rates.values.min()) <= 0.0:
        raise ValueError("IAR exploration requires strictly positive rates")
    indptr, nbr, eid = net.csr()
    edge_cost = rates.values ** -iar.eta + iar.epsilon_use
    dist, parent, via = dijkstra_sum(indptr, nbr, eid, edge_cost, s)
    return CostMatrix(net, s, dist, parent, via, edge_cost)


class Disjointness(str, Enum):
    EDGE = "edge"
    NODE = "node"


@dataclass(frozen=True)
class FixedM:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("M must be at least 1")


@dataclass(frozen=True)
class RateTarget:
    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate target must be positive")


@dataclass(frozen=True)
class ReconstructionResult:
    route_set: RouteSet
    #: None under FixedM; under RateTarget, whether the target was met.
    target_met: Optional[bool]
    #: Protocol rate of the accumulated edge union (RateTarget only).
    achieved_rate: Optional[float]


def mdp_reconstruct(T: CostMatrix, net: Network, rates: RateDistribution,
                    pair: tuple[int, int],
                    stop: FixedM | RateTarget,
                    disjointness: Disjointness = Disjointness.EDGE
                    ) -> ReconstructionResult:
    """Sequential backtracking from target to source through the cost
    matrix, masking used edges (or used intermediate nodes) between
    routes.

    Each attempt walks greedily toward the source, always taking the
    cheapest admissible via entry.  A dead-ended branch is discarded by
    backtracking one step and excluding the stuck node for the rest of
    the attempt, so an attempt fails only when the masked network truly
    disconnects the pair; reconstruction then stops.  Exhaustion before
    the stop rule is met is a normal partial result."""
    s, t = pair
    if T.net is not net or T.source != s:
        raise ValueError("cost matrix does not match this source/network")
    indptr, nbr, eid = net.csr()
    diag = T.diag
    edge_cost = T.edge_cost
    blocked = np.zeros(net.n_edges, dtype=bool)  # edges used by routes
    used_nodes: set[int] = set()
    routes: list[Route] = []
    achieved = 0.0 if isinstance(stop, RateTarget) else None
    met: Optional[bool] = False if isinstance(stop, RateTarget) else None

    def candidates(cur: int, on_path: set[int],
                   failed: set[int]) -> list[tuple[float, int]]:
        out = []
        for k in range(indptr[cur], indptr[cur + 1]):
            x = int(nbr[k])
            if x in on_path or x in failed or blocked[eid[k]]:
                continue
            if (disjointness is Disjointness.NODE
                    and x in used_nodes and x != s):
                continue
            if not math.isfinite(diag[x]):
                continue
            out.append((float(diag[x] + edge_cost[eid[k]]), x))
        out.sort()
        return out

    def next_route() -> Optional[Route]:
        on_path = {t}
        failed: set[int] = set()
        path = [t]
        options = [candidates(t, on_path, failed)]
        while path:
            cur_options = options[-1]
            if not cur_options:
                dead = path.pop()
                options.pop()
                on_path.discard(dead)
                failed.add(dead)
                continue
            _, x = cur_options.pop(0)
            if x == s:
                path.append(s)
                return Route(tuple(reversed(path)))
            path.append(x)
            on_path.add(x)
            options.append(candidates(x, on_path, failed))
        return None

    while True:
        if isinstance(stop, FixedM) and len(routes) >= stop.m:
            break
        route = next_route()
        if route is None:
            break
        routes.append(route)
        for u, v in route.edges():
            blocked[net.edge_id(u, v)] = True
        used_nodes.update(route.nodes[1:-1])
        if isinstance(stop, RateTarget):
            rset = RouteSet(tuple(routes), s, t)
            achieved = protocol_rate(net, rates, pair, rset)
            if achieved >= stop.rate:
                met = True
                break
    return ReconstructionResult(RouteSet(tuple(routes), s, t), met, achieved)


def iterative_disjoint_dijkstra(net: Network, rates: RateDistribution,
                                pair: tuple[int, int], m: int,
                                disjointness: Disjointness = Disjointness.EDGE
                                ) -> RouteSet:
    """Up to m disjoint widest routes via repeated search with removal
    of previously used edges (or nodes' incident edges)."""
    if m < 1:
        raise ValueError("M must be at least 1")
    a, b = pair
    indptr, nbr, eid = net.csr()
    caps = rates.values.copy()
    routes: list[Route] = []
    blocked_nodes: set[int] = set()
    for _ in range(m):
        bott, parent = dijkstra_widest(indptr, nbr, eid, caps, a)
        if parent[b] < 0 or bott[b] <= 0.0:
            break
        nodes = [b]
        while nodes[-1] != a:
            nodes.append(int(parent[nodes[-1]]))
        route = Route(tuple(reversed(nodes)))
        routes.append(route)
        for u, v in route.edges():
            caps[net.edge_id(u, v)] = 0.0
        if disjointness is Disjointness.NODE:
            blocked_nodes.update(route.nodes[1:-1])
            for x in blocked_nodes:
                for y in net.adjacency[x]:
                    caps[net.edge_id(x, y)] = 0.0
    return RouteSet(tuple(routes), a, b)


class ProtocolKind(str, Enum):
    FLOODING = "flooding"
    SINGLE_PATH = "single_path"
    MDP_FIXED = "mdp_fixed"
    MDP_RATE_TARGET = "mdp_rate_target"
    ITER_DIJKSTRA = "iter_dijkstra"


@dataclass(frozen=True)
class ProtocolSpec:
    kind: ProtocolKind
    m: int = 2
    rate_target: float = 1.0
    disjointness: Disjointness = Disjointness.EDGE
    iar: IarParams = field(default_factory=IarParams)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("M must be at least 1")
        if self.rate_target <= 0:
            raise ValueError("rate target must be positive")


@dataclass(frozen=True)
class ProtocolResult:
    route_set: Optional[RouteSet]  # None for flooding
    rate: float
    consumption_edges: int
    target_met: Optional[bool] = None


def run_protocol(net: Network, rates: RateDistribution,
                 pair: tuple[int, int], spec: ProtocolSpec) -> ProtocolResult:
    """Dispatch a protocol over one end-user pair."""
    a, b = pair
    if a == b:
        raise ValueError("end users must be distinct nodes")
    if spec.kind is ProtocolKind.FLOODING:
        value = max_flow(net, rates, a, b).value if net.n_edges else 0.0
        return ProtocolResult(None, value, net.n_edges)
    if spec.kind is ProtocolKind.SINGLE_PATH:
        route, rate = single_path_rate(net, rates, pair)
        if route is None:
            return ProtocolResult(RouteSet((), a, b), 0.0, 0)
        return ProtocolResult(RouteSet((route,), a, b), rate, len(route))
    if spec.kind is ProtocolKind.ITER_DIJKSTRA:
        rset = iterative_disjoint_dijkstra(net, rates, pair, spec.m,
                                           spec.disjointness)
        rate = protocol_rate(net, rates, pair, rset) if rset.routes else 0.0
        return ProtocolResult(rset, rate, len(rset.edge_union()))
    # MDP variants share one exploration
    if net.n_edges == 0:
        return ProtocolResult(RouteSet((), a, b), 0.0, 0,
                              False if spec.kind is ProtocolKind.MDP_RATE_TARGET
                              else None)
    T = mdp_explore(net, rates, spec.iar, a)
    stop: FixedM | RateTarget
    if spec.kind is ProtocolKind.MDP_FIXED:
        stop = FixedM(spec.m)
    else:
        stop = RateTarget(spec.rate_target)
    result = mdp_reconstruct(T, net, rates, pair, stop, spec.disjointness)
    rset = result.route_set
    if not rset.routes:
        return ProtocolResult(rset, 0.0, 0, result.target_met)
    if result.achieved_rate is not None:
        rate = result.achieved_rate
    else:
        rate = protocol_rate(net, rates, pair, rset)
    return ProtocolResult(rset, rate, len(rset.edge_union()),
                          result.target_met)
