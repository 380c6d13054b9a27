"""Point-to-point rate models for fiber links.

Covers transmissivity, the thermal-loss capacity bounds, the pure-loss
(PLOB) capacity and the asymptotic CV-QKD secret-key rate, plus the
assignment of per-edge rates across a network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .netmodel import Network

#: Loss exponent per km for 0.2 dB/km fiber: eta = 10^(-gamma * d).
DEFAULT_GAMMA = 0.02
#: Output thermal photon number of the channel.
DEFAULT_NBAR = 1.0 / 500.0


@dataclass(frozen=True)
class FiberParams:
    gamma: float = DEFAULT_GAMMA
    nbar: float = DEFAULT_NBAR

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.nbar < 0:
            raise ValueError("nbar must be non-negative")


@dataclass(frozen=True)
class CvQkdParams:
    eta_eff: float = 0.7
    beta_rec: float = 0.95
    mu: float = 20.0
    nbar: float = DEFAULT_NBAR

    def __post_init__(self):
        if not 0 < self.eta_eff <= 1:
            raise ValueError("eta_eff must lie in (0, 1]")
        if not 0 < self.beta_rec <= 1:
            raise ValueError("beta_rec must lie in (0, 1]")
        if self.mu <= 1:
            raise ValueError("mu must exceed 1")
        if self.nbar < 0:
            raise ValueError("nbar must be non-negative")


def transmissivity(d: float, gamma: float = DEFAULT_GAMMA) -> float:
    """Fiber transmissivity 10^(-gamma*d) for a channel of length d km."""
    if d < 0:
        raise ValueError("distance must be non-negative")
    return 10.0 ** (-gamma * d)


def entropic_h(x: float) -> float:
    """(x+1)log2(x+1) - x log2 x, with h(0) = 0 by the x log x -> 0 limit."""
    if x < 0:
        raise ValueError("mean photon number must be non-negative")
    if x == 0:
        return 0.0
    return (x + 1) * math.log2(x + 1) - x * math.log2(x)


def entropic_h_sym(nu: float) -> float:
    """Entropy of a thermal state parameterized by its symplectic
    eigenvalue nu >= 1; equals entropic_h((nu - 1) / 2)."""
    if nu < 1:
        raise ValueError("symplectic eigenvalue must be >= 1")
    if nu == 1:
        return 0.0
    a, b = (nu + 1) / 2, (nu - 1) / 2
    return a * math.log2(a) - b * math.log2(b)


def pure_loss_capacity(eta: float) -> float:
    """PLOB bound -log2(1 - eta) for the pure-loss channel."""
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    return -math.log2(1.0 - eta)


def thermal_bounds(eta: float, nbar: float) -> tuple[float, float]:
    """Lower and upper bounds on the thermal-loss channel capacity.

    The upper bound is built from the unclamped lower expression, so the
    ordering lower <= upper holds even after clamping at zero.  When the
    channel is entanglement-breaking (n_env >= eta / (1 - eta), i.e.
    nbar >= eta) the capacity is exactly zero; without this clamp the
    upper expression turns back upward at long distance and the bound
    would stop being monotone in the channel length.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    if nbar >= eta:
        return 0.0, 0.0
    n_env = nbar / (1.0 - eta)
    lower_raw = -math.log2(1.0 - eta) - entropic_h(n_env)
    upper_raw = lower_raw - n_env * math.log2(eta)
    return max(0.0, lower_raw), max(0.0, upper_raw)


def cvqkd_rate(d: float, p: CvQkdParams, f: FiberParams) -> float:
    """Asymptotic secret-key rate of the Gaussian-modulated coherent-state
    protocol with heterodyne detection, clamped at zero.

    All loss beyond the detector is attributed to the eavesdropper:
    tau = eta_eff * 10^(-gamma*d).
    """
    tau = p.eta_eff * transmissivity(d, f.gamma)
    if not 0 < tau < 1:
        raise ValueError("total transmissivity must lie in (0, 1)")
    mu, nbar = p.mu, p.nbar
    b = tau * (mu - 1.0) + 2.0 * nbar + 1.0
    c2 = tau * (mu * mu - 1.0)
    delta = mu * mu + b * b - 2.0 * c2
    det_v = (mu * b - c2) ** 2
    disc = delta * delta - 4.0 * det_v
    if disc < 0 and disc > -1e-9 * max(1.0, delta * delta):
        disc = 0.0
    root = math.sqrt(disc)
    nu_plus = math.sqrt((delta + root) / 2.0)
    nu_minus = math.sqrt((delta - root) / 2.0)
    nu_cond = mu - c2 / (b + 1.0)
    for nu in (nu_plus, nu_minus, nu_cond):
        if nu < 1.0 - 1e-9:
            raise ValueError(
                f"unphysical symplectic eigenvalue {nu} for d={d} km")
    holevo = (entropic_h_sym(max(1.0, nu_plus))
              + entropic_h_sym(max(1.0, nu_minus))
              - entropic_h_sym(max(1.0, nu_cond)))
    i_ab = math.log2(1.0 + tau * (mu - 1.0) / (2.0 * (nbar + 1.0)))
    return max(0.0, p.beta_rec * i_ab - holevo)


class RateModelKind(str, Enum):
    PURE_LOSS = "pure_loss"
    THERMAL_UPPER = "thermal_upper"
    THERMAL_LOWER = "thermal_lower"
    CVQKD = "cvqkd"


@dataclass(frozen=True)
class RateModel:
    """Per-edge rate rule: evaluates a link model at an edge's length."""

    kind: RateModelKind = RateModelKind.THERMAL_UPPER
    fiber: FiberParams = field(default_factory=FiberParams)
    cvqkd: CvQkdParams = field(default_factory=CvQkdParams)

    def rate(self, d: float) -> float:
        eta = transmissivity(d, self.fiber.gamma)
        if self.kind is RateModelKind.PURE_LOSS:
            return pure_loss_capacity(eta) if eta < 1 else math.inf
        if self.kind is RateModelKind.THERMAL_LOWER:
            return thermal_bounds(eta, self.fiber.nbar)[0]
        if self.kind is RateModelKind.THERMAL_UPPER:
            return thermal_bounds(eta, self.fiber.nbar)[1]
        return cvqkd_rate(d, self.cvqkd, self.fiber)

    def rates(self, d: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an array of lengths (km)."""
        d = np.asarray(d, dtype=float)
        if np.any(d <= 0):
            raise ValueError("edge lengths must be positive")
        eta = 10.0 ** (-self.fiber.gamma * d)
        if self.kind is RateModelKind.PURE_LOSS:
            return -np.log2(1.0 - eta)
        if self.kind is RateModelKind.CVQKD:
            return np.array([cvqkd_rate(x, self.cvqkd, self.fiber) for x in d])
        nbar = self.fiber.nbar
        n_env = nbar / (1.0 - eta)
        h = np.where(n_env > 0,
                     (n_env + 1) * np.log2(n_env + 1)
                     - n_env * np.log2(np.where(n_env > 0, n_env, 1.0)),
                     0.0)
        lower_raw = -np.log2(1.0 - eta) - h
        breaking = nbar >= eta
        if self.kind is RateModelKind.THERMAL_LOWER:
            return np.where(breaking, 0.0, np.maximum(0.0, lower_raw))
        upper = np.maximum(0.0, lower_raw - n_env * np.log2(eta))
        return np.where(breaking, 0.0, upper)


class RateDistribution(Mapping):
    """One rate per network edge, keyed by the normalized (u, v) pair.

    Backed by an array aligned with the host network's edge order so the
    numerical kernels can consume it without conversion.
    """

    def __init__(self, net: Network, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != (net.n_edges,):
            raise ValueError("one rate per edge required")
        if np.any(values < 0):
            raise ValueError("rates must be non-negative")
        self.net = net
        self.values = values
        self.values.setflags(write=False)

    def __getitem__(self, edge: tuple[int, int]) -> float:
        return float(self.values[self.net.edge_id(*edge)])

    def __iter__(self):
        return iter(self.net.edge_list)

    def __len__(self) -> int:
        return self.net.n_edges

    def restrict(self, sub: Network) -> "RateDistribution":
        """Rates of `self` carried over to a subnetwork's edge set."""
        vals = [self[e] for e in sub.edge_list]
        return RateDistribution(sub, np.array(vals, dtype=float))


def assign_rates(net: Network, model: RateModel) -> RateDistribution:
    """Evaluate the model at every edge length."""
    if net.n_edges == 0:
        return RateDistribution(net, np.empty(0))
    return RateDistribution(net, model.rates(net.lengths))
