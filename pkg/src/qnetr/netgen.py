"""Random topology generation (Waxman and distance-aware scale-free
attachment) and rate-threshold pruning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linkrate import RateDistribution
from .netmodel import MIN_NODE_SEPARATION_KM, Network

#: Default pruning threshold: ~1 mbit/s at a GHz clock.
DEFAULT_PRUNE_EPSILON = 1e-12

_PAIR_CHUNK = 256  # rows per vectorized pair-sampling block


@dataclass(frozen=True)
class WaxmanParams:
    n: int
    radius_km: float
    beta: float = 1.0
    r0_km: float | None = 100.0  # None means no distance decay (Erdos-Renyi)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one node")
        if self.radius_km <= 0:
            raise ValueError("radius must be positive")
        if not 0 <= self.beta <= 1:
            raise ValueError("beta must lie in [0, 1]")
        if self.r0_km is not None and self.r0_km <= 0:
            raise ValueError("r0 must be positive")


@dataclass(frozen=True)
class ScaleFreeParams:
    n: int
    radius_km: float
    n0: int = 10
    m: int = 5
    sigma_deg: float = 1.0
    sigma_r: float = 1.0

    def __post_init__(self):
        if self.n0 < 2:
            raise ValueError("seed network needs at least two nodes")
        if self.n < self.n0:
            raise ValueError("n must be at least n0")
        if not 1 <= self.m <= self.n0:
            raise ValueError("m must lie in [1, n0]")
        if self.sigma_deg < 0 or self.sigma_r < 0:
            raise ValueError("exponents must be non-negative")
        if self.radius_km <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class PruneParams:
    epsilon: float = DEFAULT_PRUNE_EPSILON

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")


def _sample_disc(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """Uniform-in-area positions; resamples any point closer than the
    minimum separation to an earlier one."""
    from scipy.spatial import cKDTree

    def draw(k):
        r = radius * np.sqrt(rng.random(k))
        theta = 2.0 * math.pi * rng.random(k)
        return np.column_stack([r * np.cos(theta), r * np.sin(theta)])

    pts = draw(n)
    while True:
        close = cKDTree(pts).query_pairs(MIN_NODE_SEPARATION_KM)
        if not close:
            return pts
        for c in sorted({max(i, j) for i, j in close}):
            pts[c] = draw(1)[0]


def generate_waxman(p: WaxmanParams, rng_seed: int) -> Network:
    """Nodes uniform in the disc; each unordered pair connected
    independently with probability beta * exp(-r / r0)."""
    rng = np.random.default_rng(rng_seed)
    pts = _sample_disc(rng, p.n, p.radius_km)
    blocks: list[np.ndarray] = []
    if p.beta > 0:
        for i in range(0, p.n, _PAIR_CHUNK):
            hi = min(i + _PAIR_CHUNK, p.n)
            block = pts[i:hi]
            d = np.hypot(block[:, None, 0] - pts[None, :, 0],
                         block[:, None, 1] - pts[None, :, 1])
            if p.r0_km is None:
                prob = np.full_like(d, p.beta)
            else:
                prob = p.beta * np.exp(-d / p.r0_km)
            draw = rng.random(prob.shape)
            rows, cols = np.nonzero(draw < prob)
            rows = rows + i
            upper = rows < cols
            blocks.append(np.column_stack([rows[upper], cols[upper]]))
    pairs = (np.concatenate(blocks) if blocks
             else np.empty((0, 2), dtype=np.int64))
    return Network(p.radius_km, pts, pairs)


def generate_scale_free(p: ScaleFreeParams, rng_seed: int) -> Network:
    """Growth model: complete seed graph on n0 nodes, then each new node
    attaches to m distinct existing nodes with probability proportional
    to k^sigma_deg / r^sigma_r, drawn sequentially without replacement."""
    rng = np.random.default_rng(rng_seed)
    pts = _sample_disc(rng, p.n, p.radius_km)
    pairs = [(i, j) for i in range(p.n0) for j in range(i + 1, p.n0)]
    degree = np.zeros(p.n, dtype=float)
    degree[:p.n0] = p.n0 - 1

    for y in range(p.n0, p.n):
        d = np.hypot(pts[:y, 0] - pts[y, 0], pts[:y, 1] - pts[y, 1])
        # k = 0 would zero the weight; only reachable in pathological configs
        weight = np.maximum(degree[:y], 1.0) ** p.sigma_deg / d ** p.sigma_r
        chosen: list[int] = []
        for _ in range(min(p.m, y)):
            total = weight.sum()
            probs = weight / total
            x = int(rng.choice(y, p=probs))
            chosen.append(x)
            weight[x] = 0.0
        for x in chosen:
            pairs.append((x, y))
            degree[x] += 1
        degree[y] = len(chosen)

    return Network(p.radius_km, pts, pairs)


def prune(net: Network, rates: RateDistribution,
          p: PruneParams = PruneParams()) -> tuple[Network, RateDistribution]:
    """Drop every edge whose rate falls below the threshold.

    The node set is unchanged; the returned distribution covers exactly
    the surviving edges.
    """
    if rates.net is not net:
        raise ValueError("rate distribution belongs to a different network")
    keep = rates.values >= p.epsilon
    sub = Network(net.radius_km, net.positions, net.ends[keep])
    return sub, RateDistribution(sub, rates.values[keep])
