"""Shared helpers: random test networks and high-precision oracles."""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np

from qnetr.linkrate import CvQkdParams, FiberParams, RateDistribution
from qnetr.netmodel import Network


def disc_positions(rng: np.random.Generator, n: int,
                   radius: float = 100.0) -> np.ndarray:
    """Uniform-in-area positions, far enough apart for valid edges."""
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def random_network(rng: np.random.Generator, n: int, edge_prob: float = 0.5,
                   radius: float = 100.0) -> Network:
    pts = disc_positions(rng, n, radius)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < edge_prob]
    return Network(radius, pts, pairs)


def random_rates(rng: np.random.Generator, net: Network, lo: float = 0.05,
                 hi: float = 2.0) -> RateDistribution:
    return RateDistribution(net, rng.uniform(lo, hi, net.n_edges))


def enumerate_simple_paths(net: Network, s: int, t: int):
    """All simple s-t paths as node tuples (exponential; tiny graphs only)."""
    out = []

    def walk(node, seen, path):
        if node == t:
            out.append(tuple(path))
            return
        for nxt in net.adjacency[node]:
            if nxt not in seen:
                seen.add(nxt)
                path.append(nxt)
                walk(nxt, seen, path)
                path.pop()
                seen.discard(nxt)

    walk(s, {s}, [s])
    return out


def widest_by_enumeration(net: Network, rates: RateDistribution,
                          s: int, t: int) -> float:
    """Max over simple paths of the min edge rate; 0 when disconnected."""
    best = 0.0
    for path in enumerate_simple_paths(net, s, t):
        bottleneck = min(rates[(a, b)] for a, b in zip(path, path[1:]))
        best = max(best, bottleneck)
    return best


def cvqkd_oracle(d: float, p: CvQkdParams, f: FiberParams) -> float:
    """Secret-key rate recomputed from the covariance matrix with mpmath.

    Symplectic eigenvalues come from the spectrum of -(Omega V)^2 and the
    conditional state from the Schur complement after heterodyne
    measurement, so this shares no closed-form shortcut with the
    implementation under test.
    """
    with mp.workdps(50):
        tau = mp.mpf(p.eta_eff) * mp.power(10, -mp.mpf(f.gamma) * mp.mpf(d))
        mu, nbar = mp.mpf(p.mu), mp.mpf(p.nbar)
        b = tau * (mu - 1) + 2 * nbar + 1
        c = mp.sqrt(tau * (mu * mu - 1))
        V = mp.matrix([[mu, 0, c, 0],
                       [0, mu, 0, -c],
                       [c, 0, b, 0],
                       [0, -c, 0, b]])
        Omega = mp.matrix([[0, 1, 0, 0],
                           [-1, 0, 0, 0],
                           [0, 0, 0, 1],
                           [0, 0, -1, 0]])
        M = -(Omega * V) * (Omega * V)
        eigvals = mp.eig(M, left=False, right=False)
        nus = sorted(mp.sqrt(abs(ev)) for ev in eigvals)
        nu_minus, nu_plus = nus[0], nus[-1]
        # heterodyne on the B mode: Schur complement against B + I
        A = V[0:2, 0:2]
        Bm = V[2:4, 2:4]
        C = V[0:2, 2:4]
        cond = A - C * (Bm + mp.eye(2)) ** -1 * C.T
        nu_cond = mp.sqrt(cond[0, 0] * cond[1, 1] - cond[0, 1] * cond[1, 0])

        def h_sym(nu):
            if nu <= 1:
                return mp.mpf(0)
            a1, b1 = (nu + 1) / 2, (nu - 1) / 2
            return (a1 * mp.log(a1) - b1 * mp.log(b1)) / mp.log(2)

        holevo = h_sym(nu_plus) + h_sym(nu_minus) - h_sym(nu_cond)
        # mutual information from the conditional B variance
        b_cond = b - c * c / (mu + 1)
        i_ab = mp.log((b + 1) / (b_cond + 1)) / mp.log(2)
        rate = mp.mpf(p.beta_rec) * i_ab - holevo
        return float(max(mp.mpf(0), rate))


def thermal_oracle(eta: float, nbar: float) -> tuple[float, float]:
    """Thermal-loss capacity bounds recomputed at 50 digits."""
    with mp.workdps(50):
        eta, nbar = mp.mpf(eta), mp.mpf(nbar)
        if nbar >= eta:
            return 0.0, 0.0
        n_env = nbar / (1 - eta)

        def h(x):
            if x == 0:
                return mp.mpf(0)
            return ((x + 1) * mp.log(x + 1) - x * mp.log(x)) / mp.log(2)

        lower_raw = -mp.log(1 - eta) / mp.log(2) - h(n_env)
        upper_raw = lower_raw - n_env * mp.log(eta) / mp.log(2)
        return (float(max(mp.mpf(0), lower_raw)),
                float(max(mp.mpf(0), upper_raw)))
