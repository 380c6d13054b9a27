"""Configuration-driven command-line front end: seeded sweep execution,
CSV/JSON result persistence and plot-ready data emission."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .linkrate import CvQkdParams, FiberParams, RateModel, RateModelKind
from .metrics import (CriticalDensity, DensitySweep, EnsembleResult,
                      EnsembleSpec, classify_phases,
                      critical_density_consumption,
                      critical_density_performance,
                      critical_density_performance_from_fraction)
from .netgen import PruneParams, ScaleFreeParams, WaxmanParams
from .routing import Disjointness, IarParams, ProtocolKind, ProtocolSpec

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["topology", "rate_model", "protocols", "sweep", "sampling"],
    "properties": {
        "topology": {
            "type": "object",
            "required": ["topology", "radius_km"],
            "properties": {
                "topology": {"enum": ["waxman", "scale_free"]},
                "radius_km": {"type": "number", "exclusiveMinimum": 0},
                "beta": {"type": "number", "minimum": 0, "maximum": 1},
                "r0_km": {"type": ["number", "null"]},
                "n0": {"type": "integer", "minimum": 2},
                "m": {"type": "integer", "minimum": 1},
                "sigma_deg": {"type": "number", "minimum": 0},
                "sigma_r": {"type": "number", "minimum": 0},
                "prune_epsilon": {"type": "number", "minimum": 0},
            },
        },
        "rate_model": {
            "type": "object",
            "required": ["model"],
            "properties": {
                "model": {"enum": ["pure_loss", "thermal_upper",
                                   "thermal_lower", "cvqkd"]},
                "gamma_db_per_km": {"type": "number", "exclusiveMinimum": 0},
                "nbar": {"type": "number", "minimum": 0},
                "eta_eff": {"type": "number"},
                "beta_rec": {"type": "number"},
                "mu": {"type": "number"},
            },
        },
        "protocols": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["protocol"],
                "properties": {
                    "protocol": {"enum": ["flooding", "single_path",
                                          "mdp_fixed", "mdp_rate_target",
                                          "iter_dijkstra"]},
                    "M": {"type": "integer", "minimum": 1},
                    "rate_target": {"type": "number", "exclusiveMinimum": 0},
                    "disjoint": {"enum": ["edge", "node"]},
                    "iar_eta": {"type": "number", "minimum": 0},
                    "iar_epsilon": {"type": "number", "minimum": 0},
                },
            },
        },
        "sweep": {
            "type": "object",
            "properties": {
                "densities": {"type": "array", "minItems": 1,
                              "items": {"type": "number",
                                        "exclusiveMinimum": 0}},
                "points": {"type": "array", "minItems": 1,
                           "items": {"type": "object",
                                     "required": ["n", "radius_km"]}},
            },
        },
        "sampling": {
            "type": "object",
            "required": ["pairs_per_network", "networks"],
            "properties": {
                "pairs_per_network": {"type": "integer", "minimum": 1},
                "networks": {"type": "integer", "minimum": 1},
            },
        },
        "seed": {"type": "integer"},
        "workers": {"type": "integer", "minimum": 1},
        "output_dir": {"type": "string"},
        "giant_component_pairs_only": {"type": "boolean"},
    },
}

CSV_COLUMNS = ["protocol", "rho", "n", "radius_km", "mean_rate", "se_rate",
               "mean_consumption", "se_consumption", "giant_fraction",
               "avg_degree", "pairs_per_network", "networks", "seed"]


class ConfigError(Exception):
    pass


def load_config(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    sweep = doc["sweep"]
    if ("densities" in sweep) == ("points" in sweep):
        raise ConfigError("sweep needs exactly one of 'densities' or 'points'")
    return doc


def _rate_model(section: dict) -> RateModel:
    gamma = section.get("gamma_db_per_km", 0.2) / 10.0
    nbar = section.get("nbar", 1.0 / 500.0)
    fiber = FiberParams(gamma=gamma, nbar=nbar)
    cv = CvQkdParams(eta_eff=section.get("eta_eff", 0.7),
                     beta_rec=section.get("beta_rec", 0.95),
                     mu=section.get("mu", 20.0),
                     nbar=nbar)
    return RateModel(RateModelKind(section["model"]), fiber, cv)


def _protocol(section: dict) -> ProtocolSpec:
    return ProtocolSpec(
        kind=ProtocolKind(section["protocol"]),
        m=section.get("M", 2),
        rate_target=section.get("rate_target", 1.0),
        disjointness=Disjointness(section.get("disjoint", "edge")),
        iar=IarParams(eta=section.get("iar_eta", 5.0),
                      epsilon_use=section.get("iar_epsilon", 1.0)))


def _topology(section: dict, n: int, radius: float):
    if section["topology"] == "waxman":
        return WaxmanParams(n=n, radius_km=radius,
                            beta=section.get("beta", 1.0),
                            r0_km=section.get("r0_km", 100.0))
    return ScaleFreeParams(n=n, radius_km=radius,
                           n0=section.get("n0", 10),
                           m=section.get("m", 5),
                           sigma_deg=section.get("sigma_deg", 1.0),
                           sigma_r=section.get("sigma_r", 1.0))


def sweep_points(config: dict) -> list[tuple[int, float, float]]:
    """(n, radius_km, rho) per sweep point, in grid order."""
    sweep = config["sweep"]
    out = []
    if "densities" in sweep:
        radius = config["topology"]["radius_km"]
        area = math.pi * radius ** 2
        for rho in sweep["densities"]:
            n = max(2, round(rho * area))
            out.append((n, radius, rho))
    else:
        for pt in sweep["points"]:
            n, radius = pt["n"], pt["radius_km"]
            out.append((n, radius, n / (math.pi * radius ** 2)))
    return out


def run_experiment(config_path: str | Path, seed: int | None = None,
                   workers: int | None = None,
                   out_dir: str | Path | None = None) -> dict:
    """Run every (sweep point x protocol) cell, write results.csv and
    summary.json, and return the summary document."""
    config = load_config(config_path)
    seed = config.get("seed", 0) if seed is None else seed
    if workers is None:
        workers = config.get("workers",
                             int(os.environ.get("QNETR_WORKERS", "1")))
    out = Path(out_dir if out_dir is not None
               else config.get("output_dir", "results"))
    out.mkdir(parents=True, exist_ok=True)

    model = _rate_model(config["rate_model"])
    prune_params = PruneParams(
        config["topology"].get("prune_epsilon", 1e-12))
    protocols = [(p["protocol"], _protocol(p)) for p in config["protocols"]]
    sampling = config["sampling"]
    points = sweep_points(config)

    csv_path = out / "results.csv"
    marker = out / "results.csv.partial"
    marker.touch()
    per_protocol: dict[str, list[EnsembleResult]] = {}
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        fh.flush()
        for name, proto in protocols:
            results = []
            for point_index, (n, radius, rho) in enumerate(points):
                from .metrics import ensemble_evaluate
                spec = EnsembleSpec(
                    topology=_topology(config["topology"], n, radius),
                    rate_model=model, protocol=proto, prune=prune_params,
                    pairs_per_network=sampling["pairs_per_network"],
                    networks=sampling["networks"],
                    giant_component_pairs_only=config.get(
                        "giant_component_pairs_only", False))
                res = ensemble_evaluate(spec, seed, point_index, workers)
                results.append(res)
                writer.writerow([
                    name, _num(rho), n, _num(radius),
                    _num(res.mean_rate), _num(res.se_rate),
                    _num(res.mean_consumption), _num(res.se_consumption),
                    _num(res.mean_giant_fraction), _num(res.mean_degree),
                    res.pairs_per_network, res.networks, seed])
                fh.flush()
                os.fsync(fh.fileno())
            per_protocol[name] = results
    marker.unlink()

    summary = _summarize(points, per_protocol, seed)
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _critical_to_json(c: CriticalDensity) -> dict:
    return {"value": c.value, "status": c.status, "diagnostic": c.diagnostic}


def _summarize(points, per_protocol, seed) -> dict:
    densities = tuple(rho for _, _, rho in points)
    summary: dict = {"seed": seed, "densities": list(densities),
                     "protocols": {}}
    criticals: dict[str, CriticalDensity] = {}
    for name, results in per_protocol.items():
        entry: dict = {}
        if len(densities) >= 2:
            sweep = DensitySweep(densities, tuple(results))
            perf = critical_density_performance(sweep)
            entry["critical_density_performance"] = _critical_to_json(perf)
            giant = critical_density_performance_from_fraction(sweep)
            entry["critical_density_giant"] = _critical_to_json(giant)
            criticals.setdefault("giant", giant)
            if len(densities) >= 3:
                cons = critical_density_consumption(sweep)
                entry["critical_density_consumption"] = _critical_to_json(cons)
            if name == "flooding":
                criticals["flooding"] = perf
            elif name == "single_path":
                criticals["single_path"] = perf
            elif name == "mdp_rate_target":
                criticals["mdp"] = perf
                if len(densities) >= 3:
                    criticals["consumption"] = cons
        summary["protocols"][name] = entry
    if criticals:
        try:
            table = classify_phases(criticals)
            summary["phase_table"] = [
                {"rho_min": iv.lo,
                 "rho_max": None if math.isinf(iv.hi) else iv.hi,
                 "phases": sorted(iv.phases)}
                for iv in table.intervals]
        except ValueError as exc:
            summary["phase_table_error"] = str(exc)
    return summary


PLOT_KINDS = ("rate_vs_density", "consumption_vs_density",
              "rate_vs_distance", "degree_vs_density")


def emit_plot_data(results_path: str | Path, kind: str,
                   out_path: str | Path | None = None) -> str:
    """Long-format plot CSV derived from a results file (or, for the
    rate-vs-distance kind, from the four link models directly)."""
    if kind not in PLOT_KINDS:
        raise ConfigError(f"unknown plot kind {kind!r}")
    with open(results_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ConfigError("results file contains no rows")

    lines: list[list[str]] = []
    if kind == "rate_vs_distance":
        models = [(name, RateModel(RateModelKind(name)))
                  for name in ("pure_loss", "thermal_upper",
                               "thermal_lower", "cvqkd")]
        lines.append(["d_km", *(name for name, _ in models)])
        for d in np.linspace(1.0, 200.0, 200):
            lines.append([_num(d),
                          *(_num(model.rate(d)) for _, model in models)])
    else:
        column = {"rate_vs_density": "mean_rate",
                  "consumption_vs_density": "mean_consumption",
                  "degree_vs_density": "avg_degree"}[kind]
        protocols = sorted({r["protocol"] for r in rows})
        densities = sorted({float(r["rho"]) for r in rows})
        table = {(r["protocol"], float(r["rho"])): r[column] for r in rows}
        lines.append(["rho", *protocols])
        for rho in densities:
            lines.append([_num(rho),
                          *(table.get((p, rho), "") for p in protocols)])

    text_rows = lines
    if out_path is None:
        import io
        buf = io.StringIO()
        csv.writer(buf).writerows(text_rows)
        return buf.getvalue()
    with open(out_path, "w", newline="") as fh:
        csv.writer(fh).writerows(text_rows)
    return str(out_path)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qnetr",
        description="Quantum-network routing benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--out", default=None)

    p_plot = sub.add_parser("plot-data", help="emit plot-ready CSV")
    p_plot.add_argument("results")
    p_plot.add_argument("--kind", required=True, choices=PLOT_KINDS)
    p_plot.add_argument("--out", default=None)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            workers = args.workers
            if workers is None and "QNETR_WORKERS" in os.environ:
                workers = int(os.environ["QNETR_WORKERS"])
            summary = run_experiment(args.config, seed=args.seed,
                                     workers=workers, out_dir=args.out)
            print(json.dumps(summary, indent=2))
        elif args.command == "plot-data":
            text = emit_plot_data(args.results, args.kind, args.out)
            if args.out is None:
                sys.stdout.write(text)
        else:
            load_config(args.config)
            print("ok")
        return 0
    except (ConfigError, OSError, ValueError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
