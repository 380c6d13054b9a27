"""Ensemble statistics, connectivity measures, critical-density
estimation and phase classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .linkrate import RateModel, assign_rates
from .netgen import (PruneParams, ScaleFreeParams, WaxmanParams,
                     generate_scale_free, generate_waxman, prune)
from .netmodel import Network
from .routing import ProtocolKind, ProtocolSpec, run_protocol


def giant_component_fraction(net: Network) -> float:
    """Fraction of nodes in the largest connected component."""
    n = net.n_nodes
    if n < 1:
        raise ValueError("empty network")
    if net.n_edges == 0:
        return 1.0 / n
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components
    indptr, nbr, _ = net.csr()
    graph = csr_matrix((np.ones(len(nbr), dtype=np.int8), nbr, indptr),
                       shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return int(np.bincount(labels).max()) / n


def average_degree(net: Network) -> float:
    if net.n_nodes < 1:
        raise ValueError("empty network")
    return 2.0 * net.n_edges / net.n_nodes


@dataclass(frozen=True)
class PairSample:
    pair: tuple[int, int]
    rate: float
    consumption_fraction: float
    pair_separation: float


@dataclass(frozen=True)
class EnsembleSpec:
    """Everything needed to evaluate one (network class, protocol) cell."""

    topology: WaxmanParams | ScaleFreeParams
    rate_model: RateModel
    protocol: ProtocolSpec
    prune: PruneParams = field(default_factory=PruneParams)
    pairs_per_network: int = 20   # L
    networks: int = 50            # L'
    giant_component_pairs_only: bool = False

    def __post_init__(self):
        if self.pairs_per_network < 1 or self.networks < 1:
            raise ValueError("sample counts must be at least 1")

    @property
    def density(self) -> float:
        return self.topology.n / (math.pi * self.topology.radius_km ** 2)


@dataclass(frozen=True)
class NetworkStats:
    mean_rate: float
    mean_consumption: float
    giant_fraction: float
    avg_degree: float
    n_edges: int
    samples: tuple[PairSample, ...]


@dataclass(frozen=True)
class EnsembleResult:
    mean_rate: float
    se_rate: float
    mean_consumption: float
    se_consumption: float
    mean_giant_fraction: float
    mean_degree: float
    network_rates: tuple[float, ...]
    network_consumptions: tuple[float, ...]
    pairs_per_network: int
    networks: int


def _network_seed(master_seed: int, point_index: int, net_index: int,
                  stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=master_seed, spawn_key=(point_index, net_index, stream))


def _generate(spec: EnsembleSpec, seed_seq: np.random.SeedSequence):
    seed = int(seed_seq.generate_state(1)[0])
    if isinstance(spec.topology, WaxmanParams):
        net = generate_waxman(spec.topology, seed)
    else:
        net = generate_scale_free(spec.topology, seed)
    rates = assign_rates(net, spec.rate_model)
    return prune(net, rates, spec.prune)


def _sample_pairs(rng: np.random.Generator, net: Network, count: int,
                  giant_only: bool) -> list[tuple[int, int]]:
    """Up to `count` distinct unordered pairs, uniform without
    replacement within the sample."""
    nodes = np.arange(net.n_nodes)
    if giant_only and net.n_edges > 0:
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import connected_components
        indptr, nbr, _ = net.csr()
        graph = csr_matrix(
            (np.ones(len(nbr), dtype=np.int8), nbr, indptr),
            shape=(net.n_nodes, net.n_nodes))
        _, labels = connected_components(graph, directed=False)
        nodes = np.nonzero(labels == np.bincount(labels).argmax())[0]
    elif giant_only:
        nodes = nodes[:1]
    n = len(nodes)
    total = n * (n - 1) // 2
    if total <= count:
        return [(int(nodes[i]), int(nodes[j]))
                for i in range(n) for j in range(i + 1, n)]
    chosen: set[tuple[int, int]] = set()
    out: list[tuple[int, int]] = []
    while len(out) < count:
        i, j = rng.choice(n, size=2, replace=False)
        u, v = int(nodes[min(i, j)]), int(nodes[max(i, j)])
        if (u, v) not in chosen:
            chosen.add((u, v))
            out.append((u, v))
    return out


def evaluate_network(spec: EnsembleSpec, master_seed: int,
                     point_index: int, net_index: int) -> NetworkStats:
    """Generate one seeded network, run the protocol over sampled pairs
    and return the per-network means."""
    net, rates = _generate(
        spec, _network_seed(master_seed, point_index, net_index, 0))
    rng = np.random.default_rng(
        _network_seed(master_seed, point_index, net_index, 1))
    samples: list[PairSample] = []
    if net.n_nodes >= 2:
        pairs = _sample_pairs(rng, net, spec.pairs_per_network,
                              spec.giant_component_pairs_only)
        for a, b in pairs:
            res = run_protocol(net, rates, (a, b), spec.protocol)
            frac = res.consumption_edges / net.n_edges if net.n_edges else 0.0
            sep = float(np.hypot(*(net.positions[a] - net.positions[b])))
            samples.append(PairSample((a, b), res.rate, frac, sep))
    mean_rate = float(np.mean([s.rate for s in samples])) if samples else 0.0
    mean_cons = (float(np.mean([s.consumption_fraction for s in samples]))
                 if samples else 0.0)
    return NetworkStats(mean_rate, mean_cons, giant_component_fraction(net),
                        average_degree(net), net.n_edges, tuple(samples))


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if len(arr) < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(len(arr)))


def ensemble_evaluate(spec: EnsembleSpec, master_seed: int,
                      point_index: int = 0, workers: int = 1,
                      _stats: Optional[list[NetworkStats]] = None
                      ) -> EnsembleResult:
    """Seed-deterministic ensemble averages with standard errors taken
    over per-network means (networks are the independent units)."""
    indices = range(spec.networks)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(
                _evaluate_network_task,
                [(spec, master_seed, point_index, i) for i in indices],
                chunksize=1))
    else:
        stats = [evaluate_network(spec, master_seed, point_index, i)
                 for i in indices]
    if _stats is not None:
        _stats.extend(stats)
    rates = [s.mean_rate for s in stats]
    cons = [s.mean_consumption for s in stats]
    mean_rate, se_rate = _mean_se(rates)
    mean_cons, se_cons = _mean_se(cons)
    return EnsembleResult(
        mean_rate, se_rate, mean_cons, se_cons,
        float(np.mean([s.giant_fraction for s in stats])),
        float(np.mean([s.avg_degree for s in stats])),
        tuple(rates), tuple(cons), spec.pairs_per_network, spec.networks)


def _evaluate_network_task(args) -> NetworkStats:
    return evaluate_network(*args)


def amplification(base: EnsembleResult, other: EnsembleResult
                  ) -> tuple[Optional[float], Optional[float]]:
    """dB ratios (rate, consumption) of `other` over `base`; None where
    the base mean is zero."""
    dk = (10.0 * math.log10(other.mean_rate / base.mean_rate)
          if base.mean_rate > 0 else None)
    de = (10.0 * math.log10(other.mean_consumption / base.mean_consumption)
          if base.mean_consumption > 0 else None)
    return dk, de


@dataclass(frozen=True)
class DensitySweep:
    """Ensemble results on a strictly increasing nodal-density grid."""

    densities: tuple[float, ...]
    results: tuple[EnsembleResult, ...]

    def __post_init__(self):
        if len(self.densities) != len(self.results):
            raise ValueError("one result per grid point required")
        if any(b <= a for a, b in zip(self.densities, self.densities[1:])):
            raise ValueError("density grid must be strictly increasing")


@dataclass(frozen=True)
class CriticalDensity:
    value: Optional[float]
    status: str  # "ok" | "left_censored" | "right_censored" | "out_of_range"
    diagnostic: str = ""


def _log_interpolate(rho_lo, y_lo, rho_hi, y_hi, threshold) -> float:
    t = (threshold - y_lo) / (y_hi - y_lo)
    return math.exp(math.log(rho_lo) + t * (math.log(rho_hi) - math.log(rho_lo)))


def critical_density_performance(sweep: DensitySweep,
                                 threshold: float = 1.0) -> CriticalDensity:
    """Smallest density whose ensemble rate reaches the threshold,
    refined by interpolation linear in (log rho, <K>)."""
    means = [r.mean_rate for r in sweep.results]
    above = [k >= threshold for k in means]
    if not any(above):
        return CriticalDensity(None, "out_of_range",
                               "no grid point reaches the threshold")
    first = above.index(True)
    if first == 0:
        return CriticalDensity(sweep.densities[0], "left_censored",
                               "already super-critical at the lowest density")
    rho = _log_interpolate(sweep.densities[first - 1], means[first - 1],
                           sweep.densities[first], means[first], threshold)
    return CriticalDensity(rho, "ok")


def critical_density_performance_from_fraction(
        sweep: DensitySweep, threshold: float = 0.5) -> CriticalDensity:
    """Same interpolation rule applied to the giant-component fraction."""
    means = [r.mean_giant_fraction for r in sweep.results]
    above = [g >= threshold for g in means]
    if not any(above):
        return CriticalDensity(None, "out_of_range",
                               "no grid point reaches the threshold")
    first = above.index(True)
    if first == 0:
        return CriticalDensity(sweep.densities[0], "left_censored",
                               "already above threshold at the lowest density")
    rho = _log_interpolate(sweep.densities[first - 1], means[first - 1],
                           sweep.densities[first], means[first], threshold)
    return CriticalDensity(rho, "ok")


def critical_density_consumption(sweep: DensitySweep) -> CriticalDensity:
    """Density of peak routing consumption, subject to consistent decay
    afterwards (within one standard error of slack)."""
    if len(sweep.densities) < 3:
        raise ValueError("need at least three grid points")
    means = [r.mean_consumption for r in sweep.results]
    ses = [r.se_consumption for r in sweep.results]

    def decays_after(i: int) -> bool:
        return all(means[j] <= means[i] + ses[j]
                   for j in range(i + 1, len(means)))

    order = sorted(range(len(means)), key=lambda i: -means[i])
    peak = order[0]
    if peak == len(means) - 1 and all(
            means[i] <= means[i + 1] + ses[i] for i in range(len(means) - 1)):
        return CriticalDensity(None, "right_censored",
                               "consumption still rising at the last point")
    if decays_after(peak):
        return CriticalDensity(sweep.densities[peak], "ok")
    admissible = [i for i in order if decays_after(i)]
    if not admissible:
        return CriticalDensity(None, "right_censored",
                               "no admissible peak with consistent decay")
    latest = max(admissible)
    return CriticalDensity(
        sweep.densities[latest], "ok",
        "global maximum violates the decay condition; "
        "latest admissible maximum returned")


PHASE_LABELS = ("I", "II", "III", "IV", "V", "VI", "VII")


@dataclass(frozen=True)
class PhaseInterval:
    lo: float
    hi: float
    phases: frozenset[str]


@dataclass(frozen=True)
class PhaseTable:
    intervals: tuple[PhaseInterval, ...]

    @property
    def present(self) -> frozenset[str]:
        out: set[str] = set()
        for iv in self.intervals:
            out |= iv.phases
        return frozenset(out)


def classify_phases(criticals: dict[str, CriticalDensity]) -> PhaseTable:
    """Boundary table from the critical-density set.

    Keys: 'giant', 'consumption', 'flooding', 'mdp', 'single_path'.
    Raises on an inconsistent ordering (single-path below flooding).
    """
    vals = {k: c.value for k, c in criticals.items()
            if c is not None and c.value is not None}
    if not vals:
        return PhaseTable((PhaseInterval(0.0, math.inf,
                                         frozenset({"undetermined"})),))
    fl = vals.get("flooding")
    sp = vals.get("single_path")
    if fl is not None and sp is not None and sp < fl:
        raise ValueError("inconsistent ordering: single-path critical "
                         "density below the flooding one")
    boundaries = sorted(set(vals.values()))
    edges = [0.0, *boundaries, math.inf]
    cons = vals.get("consumption")

    def phases_at(rho: float) -> frozenset[str]:
        out: set[str] = set()
        g = vals.get("giant")
        if g is not None and rho < g:
            out.add("I")
        if g is not None and fl is not None and g <= rho <= fl:
            out.add("II")
        if (cons is not None and fl is not None and cons < fl
                and cons <= rho <= fl):
            out.add("III")
        if fl is not None and rho >= fl:
            out.add("IV")
        if (cons is not None and fl is not None and cons >= fl
                and rho >= cons):
            out.add("V")
        mdp = vals.get("mdp")
        if mdp is not None and rho >= mdp:
            out.add("VI")
        if sp is not None and rho >= sp:
            out.add("VII")
        return frozenset(out)

    intervals = []
    for lo, hi in zip(edges, edges[1:]):
        mid = math.sqrt(lo * hi) if lo > 0 and math.isfinite(hi) else (
            hi / 2 if math.isfinite(hi) else lo * 2 if lo > 0 else 0.0)
        if mid == 0.0:
            mid = hi / 2 if math.isfinite(hi) else 1.0
        intervals.append(PhaseInterval(lo, hi, phases_at(mid)))
    return PhaseTable(tuple(intervals))
