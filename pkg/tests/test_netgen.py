"""Random topology generators and rate-threshold pruning."""

import math

import numpy as np
import pytest

from qnetr.linkrate import FiberParams, RateModel, RateModelKind, assign_rates
from qnetr.netgen import (PruneParams, ScaleFreeParams, WaxmanParams,
                          generate_scale_free, generate_waxman, prune)
from qnetr.netmodel import MIN_NODE_SEPARATION_KM


def test_waxman_determinism():
    p = WaxmanParams(n=80, radius_km=300.0)
    assert generate_waxman(p, 42) == generate_waxman(p, 42)
    assert generate_waxman(p, 42) != generate_waxman(p, 43)


def test_waxman_positions_in_disc():
    net = generate_waxman(WaxmanParams(n=200, radius_km=150.0), 1)
    radii = np.hypot(net.positions[:, 0], net.positions[:, 1])
    assert np.all(radii <= 150.0 + 1e-9)
    from scipy.spatial import cKDTree
    assert not cKDTree(net.positions).query_pairs(MIN_NODE_SEPARATION_KM)


def test_waxman_edge_count_matches_distance_kernel():
    # conditional on the realized positions, edges are independent
    # Bernoulli(beta * exp(-d / r0)); check the count within 4 sigma
    p = WaxmanParams(n=300, radius_km=400.0, beta=0.8, r0_km=120.0)
    net = generate_waxman(p, 5)
    pts = net.positions
    d = np.hypot(pts[:, None, 0] - pts[None, :, 0],
                 pts[:, None, 1] - pts[None, :, 1])
    iu = np.triu_indices(p.n, k=1)
    probs = p.beta * np.exp(-d[iu] / p.r0_km)
    mean, sd = probs.sum(), math.sqrt((probs * (1 - probs)).sum())
    assert abs(net.n_edges - mean) < 4.0 * sd


def test_waxman_no_decay_limit_is_uniform():
    p = WaxmanParams(n=250, radius_km=500.0, beta=0.3, r0_km=None)
    net = generate_waxman(p, 9)
    total = p.n * (p.n - 1) // 2
    mean = p.beta * total
    sd = math.sqrt(total * p.beta * (1 - p.beta))
    assert abs(net.n_edges - mean) < 4.0 * sd
    # connection probability must not depend on length: compare mean edge
    # length with the mean pair distance
    pts = net.positions
    d = np.hypot(pts[:, None, 0] - pts[None, :, 0],
                 pts[:, None, 1] - pts[None, :, 1])
    all_mean = d[np.triu_indices(p.n, k=1)].mean()
    assert abs(net.lengths.mean() - all_mean) / all_mean < 0.05


def test_waxman_beta_zero():
    net = generate_waxman(WaxmanParams(n=50, radius_km=100.0, beta=0.0), 3)
    assert net.n_edges == 0


def test_waxman_param_validation():
    with pytest.raises(ValueError):
        WaxmanParams(n=0, radius_km=100.0)
    with pytest.raises(ValueError):
        WaxmanParams(n=5, radius_km=100.0, beta=1.5)
    with pytest.raises(ValueError):
        WaxmanParams(n=5, radius_km=-1.0)
    with pytest.raises(ValueError):
        WaxmanParams(n=5, radius_km=100.0, r0_km=0.0)


def test_scale_free_structure():
    p = ScaleFreeParams(n=200, radius_km=150.0, n0=10, m=5)
    net = generate_scale_free(p, 21)
    # complete seed graph plus m attachments per grown node
    assert net.n_edges == p.n0 * (p.n0 - 1) // 2 + (p.n - p.n0) * p.m
    degrees = np.bincount(net.ends.ravel(), minlength=p.n)
    assert degrees.min() >= p.m
    # growth keeps the graph connected
    from qnetr.metrics import giant_component_fraction
    assert giant_component_fraction(net) == 1.0


def test_scale_free_determinism():
    p = ScaleFreeParams(n=60, radius_km=100.0)
    assert generate_scale_free(p, 4) == generate_scale_free(p, 4)
    assert generate_scale_free(p, 4) != generate_scale_free(p, 5)


def test_scale_free_degree_bias():
    # stronger degree preference concentrates attachment on hubs
    flat = ScaleFreeParams(n=300, radius_km=150.0, sigma_deg=0.0, sigma_r=0.0)
    pref = ScaleFreeParams(n=300, radius_km=150.0, sigma_deg=2.0, sigma_r=0.0)
    max_flat = np.bincount(generate_scale_free(flat, 8).ends.ravel()).max()
    max_pref = np.bincount(generate_scale_free(pref, 8).ends.ravel()).max()
    assert max_pref > max_flat


def test_scale_free_distance_bias():
    # stronger distance penalty shortens the attachment edges
    near = ScaleFreeParams(n=200, radius_km=200.0, sigma_r=2.0)
    far = ScaleFreeParams(n=200, radius_km=200.0, sigma_r=0.0)
    assert (generate_scale_free(near, 12).lengths.mean()
            < generate_scale_free(far, 12).lengths.mean())


def test_scale_free_param_validation():
    with pytest.raises(ValueError):
        ScaleFreeParams(n=5, radius_km=100.0, n0=10)
    with pytest.raises(ValueError):
        ScaleFreeParams(n=20, radius_km=100.0, n0=4, m=5)
    with pytest.raises(ValueError):
        ScaleFreeParams(n=20, radius_km=100.0, sigma_r=-1.0)


def test_prune_oracle():
    net = generate_waxman(WaxmanParams(n=150, radius_km=400.0), 17)
    model = RateModel(RateModelKind.THERMAL_UPPER, FiberParams(nbar=0.01))
    rates = assign_rates(net, model)
    eps = 0.5
    sub, kept = prune(net, rates, PruneParams(eps))
    expected = [e for e, r in zip(net.edge_list, rates.values) if r >= eps]
    assert sub.edge_list == expected
    assert sub.n_nodes == net.n_nodes
    assert all(kept[e] == rates[e] for e in expected)
    assert np.all(kept.values >= eps)


def test_prune_is_length_threshold():
    # a monotone rate model turns the rate threshold into a length cutoff
    net = generate_waxman(WaxmanParams(n=150, radius_km=400.0), 23)
    model = RateModel(RateModelKind.THERMAL_UPPER, FiberParams(nbar=0.01))
    rates = assign_rates(net, model)
    eps = 1e-12
    sub, _ = prune(net, rates, PruneParams(eps))
    cutoff = sub.lengths.max()
    dropped = sorted(set(net.edge_list) - set(sub.edge_list))
    for u, v in dropped:
        assert net.edge_length(u, v) > cutoff


def test_prune_keeps_everything_at_zero_threshold():
    net = generate_waxman(WaxmanParams(n=60, radius_km=200.0), 2)
    rates = assign_rates(net, RateModel(RateModelKind.PURE_LOSS))
    sub, _ = prune(net, rates, PruneParams(0.0))
    assert sub == net


def test_prune_rejects_foreign_rates():
    net1 = generate_waxman(WaxmanParams(n=30, radius_km=100.0), 1)
    net2 = generate_waxman(WaxmanParams(n=30, radius_km=100.0), 2)
    rates = assign_rates(net1, RateModel(RateModelKind.PURE_LOSS))
    with pytest.raises(ValueError, match="different network"):
        prune(net2, rates)
