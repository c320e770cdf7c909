"""Command line driver: run pipeline stages, write CSVs, figures, manifest.

Exit codes: 0 success, 2 invalid input (bad config, unsupported mode, or
multiplier hypotheses provably violated), 3 numerical failure (bracket,
convergence, or insufficient data).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import build_system, config_sha256, load_config, to_dict
from .diagnostics import check_conjugacy_bound, distortion_suite
from .errors import (ConfigError, DegenerateExponent, GraphscaleError,
                     InsufficientMass, InvalidParameter, ModeUnsupported,
                     NoConvergence, NoPositiveZero, NotConverged)
from .graph import compute_graph, reduce_multiplier
from .maps import baker_driver, validate_hypotheses
from .pressure import find_sstar
from .scaling import global_xi, local_sigma_empirical, tail_exponent

_COMMANDS = ("graph", "pressure", "tail", "xi", "index", "check", "all")


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "True" if x else "False"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _warn(msg):
    print(f"graphscale: {msg}", file=sys.stderr)


def run(cfg, command: str, threads: int = 1) -> int:
    """Execute one pipeline command; returns the process exit code."""
    if command not in _COMMANDS:
        raise InvalidParameter(f"unknown command {command!r}")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    want_csv = "csv" in cfg.formats
    want_png = "png" in cfg.formats
    system = build_system(cfg.system)
    results = {}
    files = []
    exit_code = 0

    hyp = validate_hypotheses(system, cfg.hypotheses.max_period,
                              cfg.hypotheses.acim_resolution)
    results["hypotheses"] = {
        "status": hyp.status,
        "acim_log_g_mean": hyp.acim_log_g_mean,
        "worst_orbit_mean": hyp.worst_orbit_mean,
        "min_log_g": hyp.min_log_g,
        "witness_orbit": (list(hyp.witness_orbit.points)
                          if hyp.witness_orbit else None),
        "max_period": hyp.max_period,
    }
    if cfg.system.kind == "baker" and hyp.worst_orbit_mean is not None:
        # admissible amplitude window: both hypothesis means change by
        # log r under scaling, so their zeros bound r from each side
        lr = math.log(cfg.system.r)
        results["hypotheses"]["r_window"] = [
            math.exp(lr - hyp.acim_log_g_mean),
            math.exp(lr - hyp.worst_orbit_mean),
        ]
    gated = hyp.status == "violated" and command in ("pressure", "index", "all")
    if hyp.status == "violated":
        _warn(f"multiplier hypotheses violated "
              f"(a.c. mean log g = {hyp.acim_log_g_mean:.6f}, "
              f"min log g = {hyp.min_log_g:.6f})")
        if gated:
            exit_code = 2
    elif hyp.status == "undetermined":
        _warn("multiplier hypotheses undetermined (no negative periodic "
              f"orbit up to period {hyp.max_period}); attempting anyway")

    graph = None
    if command in ("graph", "tail", "xi", "all"):
        g = cfg.graph
        graph = compute_graph(system, g.grid_size, g.depth, g.tol,
                              g.zero_floor, chunk=g.chunk, threads=threads,
                              checkpoint_gap=g.checkpoint_gap)
        results["graph"] = {
            "grid_size": graph.grid.size,
            "depth": graph.depth,
            "fraction_zero": graph.fraction_zero,
            "fraction_below_floor": graph.fraction_below_floor,
            "fraction_converged": float(np.mean(graph.converged)),
            "max_value": float(graph.values.max()),
        }
        if want_csv:
            path = out / "graph.csv"
            _write_csv(path, ("theta", "phi", "depth", "converged"),
                       zip(graph.grid, graph.values, graph.depths,
                           graph.converged))
            files.append(path.name)
        if want_png:
            from .figures import graph_figure
            graph_figure(graph, out / "graph.png")
            files.append("graph.png")

    curve = None
    need_sstar = (command in ("tail", "xi") and hyp.status != "violated") \
        or (command in ("pressure", "index", "all") and not gated)
    if need_sstar:
        p = cfg.pressure
        curve = find_sstar(system, p.resolution, p.mode, p.tol, p.s_max,
                           p.curve_points)
        results["pressure"] = {
            "s_star": curve.s_star,
            "psi_prime_at_zero": curve.psi_prime_at_zero,
            "rho_at_zero": curve.rho_at_zero,
            "mode": curve.mode,
            "resolution": curve.resolution,
            "evaluations": curve.evaluations,
            "bracket": list(curve.bracket),
        }
        if command in ("pressure", "all"):
            if want_csv:
                path = out / "pressure.csv"
                _write_csv(path, ("s", "psi"),
                           zip(curve.s_values, curve.psi_values))
                files.append(path.name)
            if want_png:
                from .figures import pressure_figure
                pressure_figure(curve, out / "pressure.png")
                files.append("pressure.png")

    s_star = curve.s_star if curve is not None else None

    if command in ("tail", "all"):
        rep = tail_exponent(graph, cfg.tail.window, predicted=s_star,
                            points_per_decade=cfg.tail.points_per_decade)
        results["tail"] = {
            "slope": rep.slope, "intercept": rep.intercept, "r2": rep.r2,
            "window": list(rep.window), "predicted": rep.predicted,
            "residual": rep.residual,
        }
        if want_csv:
            path = out / "tail.csv"
            _write_csv(path, ("eps", "mass"), zip(rep.eps, rep.mass))
            files.append(path.name)
        if want_png:
            from .figures import tail_figure
            tail_figure(rep, out / "tail.png")
            files.append("tail.png")

    if command in ("xi", "all"):
        rep = global_xi(graph, cfg.xi.window, predicted=s_star,
                        points_per_decade=cfg.xi.points_per_decade)
        results["xi"] = {
            "slope_xi": rep.slope_xi, "slope_one_minus": rep.slope_one_minus,
            "r2_one_minus": rep.r2_one_minus, "window": list(rep.window),
            "predicted": rep.predicted, "residual": rep.residual,
        }
        if want_csv:
            path = out / "xi.csv"
            _write_csv(path, ("eps", "xi", "one_minus_xi"),
                       zip(rep.eps, rep.xi, rep.one_minus_xi))
            files.append(path.name)
        if want_png:
            from .figures import xi_figure
            xi_figure(rep, out / "xi.png")
            files.append("xi.png")

    if command in ("index", "all") and not gated:
        ix = cfg.index
        results["index"] = []
        for i, pt in enumerate(ix.points):
            rep = local_sigma_empirical(
                system, pt, s_star=s_star, k_min=ix.k_min, k_max=ix.k_max,
                local_grid=ix.local_grid, base_depth=ix.base_depth,
                depth_per_rung=ix.depth_per_rung, saturation=ix.saturation,
                min_hits=ix.min_hits, threads=threads)
            results["index"].append({
                "theta": rep.theta, "gamma": rep.gamma, "lam": rep.lam,
                "regime": rep.regime, "s_star": rep.s_star,
                "sigma_plus_pred": rep.sigma_plus_pred,
                "sigma_minus_pred": rep.sigma_minus_pred,
                "empirical": rep.empirical, "residual": rep.residual,
                "r2": rep.r2, "rungs_used": sum(r.used for r in rep.rungs),
            })
            if want_csv:
                path = out / f"index-{i}.csv"
                _write_csv(path, ("k", "eps", "depth", "window_lo",
                                  "window_hi", "sigma", "one_minus_sigma",
                                  "hits", "samples", "used"),
                           ((r.k, r.eps, r.depth, r.window[0], r.window[1],
                             r.sigma, r.one_minus_sigma, r.hits, r.samples,
                             r.used) for r in rep.rungs))
                files.append(path.name)
            if want_png:
                from .figures import index_figure
                index_figure(rep, out / f"index-{i}.png")
                files.append(f"index-{i}.png")

    if command in ("check", "all"):
        ck = cfg.check
        suite = distortion_suite(system, ck.samples, ck.depths, ck.delta,
                                 seed=cfg.seed)
        results["check"] = {
            "n_checks": suite.n_checks, "failures": suite.failures,
            "worst_margins": dict(sorted(suite.worst_margins.items())),
            "passed": suite.passed,
        }
        if not suite.passed:
            _warn(f"{suite.failures} distortion checks failed")
        if want_csv:
            path = out / "check.csv"
            _write_csv(path, ("check", "worst_margin"),
                       sorted(suite.worst_margins.items()))
            files.append(path.name)
        if want_png:
            from .figures import check_figure
            check_figure(suite, out / "check.png")
            files.append("check.png")
        if ck.conjugacy:
            if cfg.system.kind != "baker":
                raise InvalidParameter(
                    "conjugacy check requires the baker system")
            driver = baker_driver(cfg.system.split)
            mult = system.mult
            c = ck.conjugacy_u_coeff
            g_hat = lambda u, th: np.asarray(mult(th)) * np.exp(
                c * np.asarray(u, dtype=float))
            reduced = reduce_multiplier(driver, g_hat, ck.conjugacy_terms,
                                        holder=(1.0, c))
            conj = check_conjugacy_bound(driver, g_hat, system.fiber, reduced,
                                         ck.conjugacy_samples,
                                         ck.conjugacy_depth,
                                         ck.conjugacy_floor, seed=cfg.seed)
            results["conjugacy"] = {
                "bound": conj.bound, "max_gap": conj.max_gap,
                "violations": conj.violations,
                "positive_pairs": conj.positive_pairs,
                "positivity_mismatches": conj.positivity_mismatches,
                "residual_max": conj.residual_max,
                "residual_bound": conj.residual_bound,
                "b_hat_sup": conj.b_hat_sup,
                "truncation_bound": conj.truncation_bound,
                "passed": conj.passed,
            }
            if not conj.passed:
                _warn("conjugacy bound check failed")

    manifest = {
        "command": command,
        "config": to_dict(cfg),
        "config_sha256": config_sha256(cfg),
        "seed": cfg.seed,
        "threads": threads,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "graphscale": __version__,
        },
        "results": _jsonable(results),
        "files": files,
        "exit_code": exit_code,
    }
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return exit_code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="graphscale",
        description="Invariant graphs of concave skew products: pullback "
                    "graphs, pressure zeros, tail and local index scaling.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "graph": "compute the invariant graph on a grid",
        "pressure": "pressure curve and its positive zero s*",
        "tail": "tail exponent of the small-value mass",
        "xi": "integrated observable Xi and its defect",
        "index": "local stability index at configured points",
        "check": "distortion and conjugacy bound checks",
        "all": "run every stage",
    }
    for name in _COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", required=True,
                       help="YAML path or bundled name (pc42, t3, baker-r2.2, ...)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="seed override for check sampling")
        p.add_argument("--threads", type=int,
                       help="worker threads (default: GRAPHSCALE_THREADS or 1)")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("GRAPHSCALE_THREADS", "1") or "1")
    threads = max(threads, 1)

    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg = replace(cfg, out_dir=args.out)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        return run(cfg, args.command, threads)
    except (ConfigError, InvalidParameter, ModeUnsupported) as exc:
        _warn(f"invalid input: {exc}")
        return 2
    except (NoPositiveZero, NoConvergence, NotConverged, InsufficientMass,
            DegenerateExponent) as exc:
        _warn(f"numerical failure: {exc}")
        return 3
    except GraphscaleError as exc:
        _warn(f"failure: {exc}")
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
