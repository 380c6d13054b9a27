"""Geometric graph substrate: nodes on a disc, undirected weighted edges,
routes, cuts and the basic queries shared by every other module."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

MIN_NODE_SEPARATION_KM = 1e-6
LENGTH_FORMAT_TOL_KM = 1e-9


class Edge(NamedTuple):
    u: int
    v: int
    length: float


def euclidean_distance(p, q) -> float:
    """Planar distance between two (x, y) positions in km."""
    return math.hypot(p[0] - q[0], p[1] - q[1])


def _normalize(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class Network:
    """Immutable undirected geometric graph inside a disc of radius R.

    Edge lengths are always the Euclidean distance between endpoint
    positions.  Adjacency lists are kept sorted so that every downstream
    tie-break is deterministic.
    """

    def __init__(self, radius_km: float, positions: np.ndarray,
                 edge_pairs: Iterable[tuple[int, int]] | np.ndarray):
        positions = np.asarray(positions, dtype=float)
        if positions.ndim != 2 or positions.shape[1] != 2:
            raise ValueError("positions must be an (N, 2) array")
        self.radius_km = float(radius_km)
        self.positions = positions
        self.positions.setflags(write=False)
        n = len(positions)

        if isinstance(edge_pairs, np.ndarray):
            raw = edge_pairs.astype(np.int64).reshape(-1, 2)
        else:
            seq = list(edge_pairs)
            raw = (np.array(seq, dtype=np.int64).reshape(-1, 2)
                   if seq else np.empty((0, 2), dtype=np.int64))
        if raw.size:
            if raw.min() < 0 or raw.max() >= n:
                bad = raw[(raw.min(axis=1) < 0) | (raw.max(axis=1) >= n)][0]
                raise ValueError(f"edge ({bad[0]}, {bad[1]}) references "
                                 "unknown node")
            loops = raw[:, 0] == raw[:, 1]
            if loops.any():
                raise ValueError(f"self-loop at node {raw[loops][0][0]}")
            # normalize to u < v and deduplicate; the key sort equals
            # lexicographic order on the (u, v) pairs
            keys = np.unique(raw.min(axis=1) * n + raw.max(axis=1))
            ends = np.column_stack([keys // n, keys % n])
        else:
            ends = raw.reshape(0, 2)
        self.ends: np.ndarray = ends
        self.ends.setflags(write=False)
        if len(ends):
            diff = positions[ends[:, 0]] - positions[ends[:, 1]]
            self.lengths = np.hypot(diff[:, 0], diff[:, 1])
        else:
            self.lengths = np.empty(0, dtype=float)
        self.lengths.setflags(write=False)
        if np.any(self.lengths <= 0):
            raise ValueError("zero-length edge (coincident endpoints)")

        self._edge_list: list[tuple[int, int]] | None = None
        self._edge_id_map: dict[tuple[int, int], int] | None = None
        self._adjacency: list[list[int]] | None = None
        self._csr_cache: tuple | None = None

    @property
    def edge_list(self) -> list[tuple[int, int]]:
        """Normalized (u < v) edges in lexicographic order."""
        if self._edge_list is None:
            self._edge_list = [(int(u), int(v)) for u, v in self.ends]
        return self._edge_list

    @property
    def _edge_id(self) -> dict[tuple[int, int], int]:
        if self._edge_id_map is None:
            self._edge_id_map = {e: i for i, e in enumerate(self.edge_list)}
        return self._edge_id_map

    @property
    def adjacency(self) -> list[list[int]]:
        """Sorted neighbor list per node."""
        if self._adjacency is None:
            indptr, nbr, _ = self.csr()
            self._adjacency = [
                [int(v) for v in nbr[indptr[u]:indptr[u + 1]]]
                for u in range(self.n_nodes)]
        return self._adjacency

    # -- basic queries -------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def n_edges(self) -> int:
        return len(self.ends)

    def has_edge(self, u: int, v: int) -> bool:
        return _normalize(u, v) in self._edge_id

    def edge_id(self, u: int, v: int) -> int:
        return self._edge_id[_normalize(u, v)]

    def edge_length(self, u: int, v: int) -> float:
        return float(self.lengths[self.edge_id(u, v)])

    def edges(self) -> Iterator[Edge]:
        for (u, v), length in zip(self.edge_list, self.lengths):
            yield Edge(u, v, float(length))

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Compressed sparse adjacency: (indptr, neighbor, edge_id).

        Both directions of every undirected edge appear; neighbor order
        within a row is sorted.  Cached, since the network is immutable.
        """
        if self._csr_cache is None:
            n = self.n_nodes
            m = self.n_edges
            row = np.concatenate([self.ends[:, 0], self.ends[:, 1]])
            col = np.concatenate([self.ends[:, 1], self.ends[:, 0]])
            eids = np.concatenate([np.arange(m), np.arange(m)])
            order = np.lexsort((col, row))
            nbr = col[order]
            eid = eids[order]
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(np.bincount(row, minlength=n), out=indptr[1:])
            for arr in (indptr, nbr, eid):
                arr.setflags(write=False)
            self._csr_cache = (indptr, nbr, eid)
        return self._csr_cache

    # -- serialization -------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "radius_km": self.radius_km,
            "nodes": self.positions.tolist(),
            "edges": [[u, v] for u, v in self.edge_list],
        })

    @classmethod
    def from_json(cls, text: str) -> "Network":
        doc = json.loads(text)
        net = cls(doc["radius_km"], np.array(doc["nodes"], dtype=float),
                  [(u, v) for u, v in doc["edges"]])
        return net

    @classmethod
    def load(cls, text: str, stored_lengths: dict | None = None) -> "Network":
        """Load from JSON, checking any externally stored lengths.

        A stored length that differs from the recomputed one by more
        than 1e-9 km is a format error.
        """
        net = cls.from_json(text)
        if stored_lengths:
            for (u, v), length in stored_lengths.items():
                recomputed = net.edge_length(u, v)
                if abs(recomputed - length) > LENGTH_FORMAT_TOL_KM:
                    raise ValueError(
                        f"stored length {length} for edge ({u}, {v}) "
                        f"disagrees with recomputed {recomputed}")
        return net

    def __eq__(self, other) -> bool:
        return (isinstance(other, Network)
                and self.radius_km == other.radius_km
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.ends, other.ends))


@dataclass(frozen=True)
class Route:
    """A cycle-free end-to-end path, stored as its node sequence."""

    nodes: tuple[int, ...]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a route needs at least two nodes")

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def target(self) -> int:
        return self.nodes[-1]

    def edges(self) -> list[tuple[int, int]]:
        return [_normalize(a, b) for a, b in zip(self.nodes, self.nodes[1:])]

    def __len__(self) -> int:
        return len(self.nodes) - 1


@dataclass(frozen=True)
class RouteSet:
    """An ordered collection of routes sharing the same endpoints."""

    routes: tuple[Route, ...]
    source: int
    target: int

    def __post_init__(self):
        for r in self.routes:
            if r.source != self.source or r.target != self.target:
                raise ValueError("route endpoints differ from the set's")

    def edge_union(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for r in self.routes:
            out.update(r.edges())
        return out

    def __len__(self) -> int:
        return len(self.routes)


@dataclass(frozen=True)
class CutSet:
    """A bipartition of the node set with its crossing edges."""

    side_a: frozenset[int]
    side_b: frozenset[int]
    cut_edges: frozenset[tuple[int, int]]


def validate_route(net: Network, route: Route) -> bool:
    """True iff the route is cycle-free and every edge exists in `net`."""
    if len(set(route.nodes)) != len(route.nodes):
        return False
    return all(net.has_edge(a, b) for a, b in zip(route.nodes, route.nodes[1:]))


def subnetwork(net: Network, keep: Iterable[tuple[int, int]]) -> Network:
    """Same node set, edge set restricted to `keep`."""
    keep = [_normalize(u, v) for u, v in keep]
    for e in keep:
        if e not in net._edge_id:
            raise ValueError(f"edge {e} not present in the network")
    return Network(net.radius_km, net.positions, keep)
