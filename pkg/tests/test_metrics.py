"""Ensemble statistics, critical densities and phase classification."""

import math

import numpy as np
import pytest

from conftest import random_network
from qnetr.linkrate import FiberParams, RateModel, RateModelKind
from qnetr.metrics import (CriticalDensity, DensitySweep, EnsembleResult,
                           EnsembleSpec, amplification, average_degree,
                           classify_phases, critical_density_consumption,
                           critical_density_performance,
                           critical_density_performance_from_fraction,
                           ensemble_evaluate, evaluate_network,
                           giant_component_fraction)
from qnetr.netgen import WaxmanParams
from qnetr.netmodel import Network
from qnetr.routing import ProtocolKind, ProtocolSpec

MODEL = RateModel(RateModelKind.THERMAL_UPPER, FiberParams(nbar=0.01))


def small_spec(protocol, n=40, radius=150.0, pairs=5, networks=6,
               giant_only=False):
    return EnsembleSpec(
        topology=WaxmanParams(n=n, radius_km=radius),
        rate_model=MODEL,
        protocol=ProtocolSpec(protocol),
        pairs_per_network=pairs, networks=networks,
        giant_component_pairs_only=giant_only)


def stub(mean_rate=0.0, mean_consumption=0.0, se_consumption=0.0,
         mean_giant_fraction=0.0):
    return EnsembleResult(mean_rate, 0.0, mean_consumption, se_consumption,
                          mean_giant_fraction, 0.0, (), (), 1, 1)


def test_giant_component_fraction():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 0.0],
                    [6.0, 0.0], [7.0, 0.0]])
    net = Network(10.0, pts, [(0, 1), (2, 3), (3, 4)])
    assert giant_component_fraction(net) == pytest.approx(3 / 5)
    empty = Network(10.0, pts, [])
    assert giant_component_fraction(empty) == pytest.approx(1 / 5)
    assert average_degree(net) == pytest.approx(6 / 5)


def test_evaluate_network_determinism():
    spec = small_spec(ProtocolKind.FLOODING)
    a = evaluate_network(spec, 123, 0, 0)
    b = evaluate_network(spec, 123, 0, 0)
    assert a == b
    c = evaluate_network(spec, 123, 0, 1)
    assert a != c


def test_worker_count_does_not_change_results():
    spec = small_spec(ProtocolKind.SINGLE_PATH)
    serial = ensemble_evaluate(spec, 7, point_index=0, workers=1)
    parallel = ensemble_evaluate(spec, 7, point_index=0, workers=3)
    assert serial == parallel


def test_flooding_dominates_single_path_pairwise():
    # identical seeds generate identical networks and pairs, so the
    # comparison holds network by network, not just on the means
    flood = ensemble_evaluate(small_spec(ProtocolKind.FLOODING), 99)
    single = ensemble_evaluate(small_spec(ProtocolKind.SINGLE_PATH), 99)
    assert flood.network_rates != single.network_rates
    for f, s in zip(flood.network_rates, single.network_rates):
        assert f >= s - 1e-9


def test_consumption_fraction_bounds():
    for kind in (ProtocolKind.FLOODING, ProtocolKind.MDP_RATE_TARGET):
        res = ensemble_evaluate(small_spec(kind), 5)
        assert 0.0 <= res.mean_consumption <= 1.0
        if kind is ProtocolKind.FLOODING:
            # flooding uses every edge of every non-trivial network
            assert res.mean_consumption == pytest.approx(1.0)
        else:
            assert res.mean_consumption < 1.0


def test_giant_component_pair_sampling():
    spec = small_spec(ProtocolKind.SINGLE_PATH, n=30, radius=400.0,
                      giant_only=True, networks=4)
    stats = []
    ensemble_evaluate(spec, 3, _stats=stats)
    for s in stats:
        for sample in s.samples:
            # both endpoints inside one component => a route exists
            assert sample.rate > 0.0


def test_critical_density_interpolation():
    sweep = DensitySweep((1e-4, 2e-4, 4e-4),
                         (stub(0.2), stub(0.8), stub(1.6)))
    crit = critical_density_performance(sweep)
    assert crit.status == "ok"
    # linear in (log rho, rate): threshold 1.0 sits a quarter of the way
    want = math.exp(math.log(2e-4) + 0.25 * math.log(2.0))
    assert crit.value == pytest.approx(want, rel=1e-12)


def test_critical_density_threshold_monotonicity():
    sweep = DensitySweep((1e-4, 2e-4, 4e-4, 8e-4),
                         (stub(0.2), stub(0.8), stub(1.6), stub(3.0)))
    values = []
    for thr in (0.5, 1.0, 1.5, 2.5):
        crit = critical_density_performance(sweep, threshold=thr)
        assert crit.status == "ok"
        values.append(crit.value)
    assert values == sorted(values)


def test_critical_density_censoring():
    low = DensitySweep((1e-4, 2e-4), (stub(1.5), stub(2.0)))
    assert critical_density_performance(low).status == "left_censored"
    out = DensitySweep((1e-4, 2e-4), (stub(0.1), stub(0.2)))
    crit = critical_density_performance(out)
    assert crit.status == "out_of_range" and crit.value is None


def test_critical_density_from_fraction():
    sweep = DensitySweep((1e-4, 2e-4),
                         (stub(mean_giant_fraction=0.2),
                          stub(mean_giant_fraction=0.8)))
    crit = critical_density_performance_from_fraction(sweep)
    assert crit.status == "ok"
    assert crit.value == pytest.approx(math.sqrt(1e-4 * 2e-4), rel=1e-12)


def test_consumption_peak():
    sweep = DensitySweep(
        (1e-4, 2e-4, 4e-4, 8e-4),
        (stub(mean_consumption=0.1), stub(mean_consumption=0.4),
         stub(mean_consumption=0.3), stub(mean_consumption=0.1)))
    crit = critical_density_consumption(sweep)
    assert crit.status == "ok" and crit.value == 2e-4

    rising = DensitySweep(
        (1e-4, 2e-4, 4e-4),
        (stub(mean_consumption=0.1), stub(mean_consumption=0.2),
         stub(mean_consumption=0.4)))
    assert critical_density_consumption(rising).status == "right_censored"

    with pytest.raises(ValueError):
        critical_density_consumption(
            DensitySweep((1e-4, 2e-4), (stub(), stub())))


def test_consumption_peak_with_noise_slack():
    # a later bump within one standard error does not disqualify the peak
    sweep = DensitySweep(
        (1e-4, 2e-4, 4e-4, 8e-4),
        (stub(mean_consumption=0.1),
         stub(mean_consumption=0.40),
         stub(mean_consumption=0.41, se_consumption=0.05),
         stub(mean_consumption=0.1)))
    crit = critical_density_consumption(sweep)
    assert crit.status == "ok"


def test_density_sweep_validation():
    with pytest.raises(ValueError, match="increasing"):
        DensitySweep((2e-4, 1e-4), (stub(), stub()))
    with pytest.raises(ValueError, match="one result"):
        DensitySweep((1e-4,), (stub(), stub()))


def test_amplification():
    base = stub(mean_rate=1.0, mean_consumption=0.2)
    other = stub(mean_rate=2.0, mean_consumption=0.1)
    dk, de = amplification(base, other)
    assert dk == pytest.approx(10.0 * math.log10(2.0))
    assert de == pytest.approx(-10.0 * math.log10(2.0))
    assert amplification(stub(), other) == (None, None)


def crit(v):
    return CriticalDensity(v, "ok")


def test_classify_phases():
    table = classify_phases({
        "giant": crit(2e-4), "consumption": crit(6e-4),
        "flooding": crit(8e-4), "mdp": crit(1e-3),
        "single_path": crit(8e-3)})
    assert table.present >= {"I", "II", "III", "IV", "VI", "VII"}
    assert table.intervals[0].phases == frozenset({"I"})
    assert table.intervals[-1].phases >= {"IV", "VI", "VII"}
    edges = [iv.lo for iv in table.intervals]
    assert edges == sorted(edges)


def test_classify_phases_ordering_violation():
    with pytest.raises(ValueError, match="inconsistent"):
        classify_phases({"flooding": crit(1e-3), "single_path": crit(1e-4)})


def test_classify_phases_undetermined():
    table = classify_phases({"giant": CriticalDensity(None, "out_of_range")})
    assert table.present == frozenset({"undetermined"})
