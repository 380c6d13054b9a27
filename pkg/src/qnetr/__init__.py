"""Simulator and benchmark harness for end-to-end routing on random
quantum communication networks."""

from .netmodel import (CutSet, Edge, Network, Route, RouteSet,
                       euclidean_distance, subnetwork, validate_route)
from .linkrate import (CvQkdParams, FiberParams, RateDistribution, RateModel,
                       RateModelKind, assign_rates, cvqkd_rate, entropic_h,
                       entropic_h_sym, pure_loss_capacity, thermal_bounds,
                       transmissivity)
from .netgen import (PruneParams, ScaleFreeParams, WaxmanParams,
                     generate_scale_free, generate_waxman, prune)
from .flow import (FLOODING, Flooding, FlowResult, brute_force_min_cut,
                   max_flow, protocol_rate)
from .routing import (CostFunction, CostMatrix, Disjointness, FixedM,
                      IarParams, ProtocolKind, ProtocolResult, ProtocolSpec,
                      RateTarget, general_dijkstra, iar_cost,
                      iterative_disjoint_dijkstra, mdp_explore,
                      mdp_reconstruct, run_protocol, shortest_path_cost,
                      single_path_rate, widest_path_cost)
from .metrics import (CriticalDensity, DensitySweep, EnsembleResult,
                      EnsembleSpec, PairSample, PhaseTable, amplification,
                      average_degree, classify_phases,
                      critical_density_consumption,
                      critical_density_performance, ensemble_evaluate,
                      evaluate_network, giant_component_fraction)

__version__ = "0.1.0"
