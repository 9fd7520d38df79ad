"""Command-line front end: ``skl <experiment> [--config PATH] [--seed N] [--workers N] [--out DIR]``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .artifacts import write_csv, write_summary
from .config import EXPERIMENTS, ConfigError, RunConfig, config_from_dict, default_document, load_config
from .experiments import (
    contraction_experiment,
    energy_uniformity,
    kinetic_experiment,
    reduction_experiment,
    viscosity_sweep,
)
from .noise import path_seed, sample_path
from .solver import BlowUpError, prepare, run_problem
from .validation import SUITES, deterministic_validation

DEFECT_TOL = 1e-2
OVERFLOW_FRACTION = 1e-3


def _solve(cfg: RunConfig, out: Path, conf: dict):
    shared = cfg.build_shared()
    data = cfg.build_data(shared)
    prob = prepare(shared.grid, shared.cfg, data.u0, data.b, shared.flux, shared.noise)
    seed = path_seed(cfg.master_seed, 0)
    path = sample_path(seed, prob.n_steps, prob.dt, prob.cfg.K)
    try:
        traj = run_problem(prob, path)
    except BlowUpError as err:
        return {"finite": False}, {"blow_up_step": err.step, "dt": prob.dt}, []
    x = shared.grid.cell_centers
    f1 = write_csv(out / "solve_fields.csv", conf, ["t", "x", "u", "v"],
                   ((t, xi, u, v) for t, ur, vr in zip(traj.times, traj.u, traj.v) for xi, u, v in zip(x, ur, vr)))
    mass = shared.grid.dx * traj.v.sum(axis=1)
    f2 = write_csv(out / "solve_energy.csv", conf,
                   ["t", "l2", "l4", "dissipation2", "dissipation4", "mass_v", "boundary_flux", "noise_mass"],
                   zip(traj.times, traj.lp_norms[2], traj.lp_norms[4], traj.dissipation[2], traj.dissipation[4],
                       mass, traj.boundary_flux, traj.noise_mass))
    residual = mass - mass[0] - traj.boundary_flux - traj.noise_mass
    scale = max(1.0, float(np.max(np.abs(traj.v))))
    predicates = {"finite": True, "mass_balance": float(np.max(np.abs(residual))) <= 1e-10 * scale}
    metrics = {
        "dt": prob.dt, "n_steps": prob.n_steps, "seed": seed, "sup_l2": traj.sup_lp[2], "sup_l4": traj.sup_lp[4],
        "mass_residual": float(np.max(np.abs(residual))), "l1_final": float(shared.grid.dx * np.abs(traj.u[-1]).sum()),
    }
    return predicates, metrics, [f1, f2]


def _contraction(cfg: RunConfig, out: Path, conf: dict):
    shared = cfg.build_shared()
    d1, d2 = cfg.build_data(shared, "data"), cfg.build_data(shared, "data2")
    o = cfg.options
    r = contraction_experiment(shared, d1, d2, cfg.n_paths, cfg.master_seed, cfg.workers,
                               margin_const=o["margin_const"], antithetic=o["antithetic"])
    f = write_csv(out / "contraction.csv", conf,
                  ["t", "lhs", "rhs_init", "rhs_boundary", "ci_halfwidth", "bound_with_margin", "holds"],
                  zip(r.times, r.lhs, np.full(r.times.shape, r.rhs_init), r.rhs_boundary, r.ci_halfwidth,
                      r.bound + r.ci_halfwidth + r.margin, r.holds))
    metrics = {"excess": r.excess, "margin": r.margin, "M_b": r.M_b, "dx": r.dx, "dt": r.dt,
               "n_paths": r.n_paths, "n_aborted": r.n_aborted, "rhs_init": r.rhs_init,
               "max_lhs": float(np.max(r.lhs))}
    return {"contraction_bound": r.passed}, metrics, [f]


def _reduction(cfg: RunConfig, out: Path, conf: dict):
    shared = cfg.build_shared()
    data = cfg.build_data(shared)
    r = reduction_experiment(shared, data, cfg.n_paths, cfg.master_seed, cfg.workers, cfg.options["eps_list"])
    f = write_csv(out / "reduction.csv", conf, ["t", "gap", "variance"], zip(r.times, r.gap, r.variance))
    predicates = {
        "indicator_exact": r.indicator_max == 0.0,
        "gap_dominates_variance": bool(np.all(r.gap >= r.variance - 1e-12)),
    }
    if shared.noise.K == 0 or shared.cfg.K == 0:
        predicates["zero_noise_gap"] = float(np.max(r.gap)) == 0.0
    metrics = {"gap_final": float(r.gap[-1]), "gap_by_eps": r.gap_by_eps, "eps": r.eps,
               "n_paths": r.n_paths, "n_aborted": r.n_aborted,
               "note": "single paths are exact indicators; the gap measures cross-path spread"}
    return predicates, metrics, [f]


def _sweep(cfg: RunConfig, out: Path, conf: dict):
    shared = cfg.build_shared()
    data = cfg.build_data(shared)
    eps = cfg.options["eps_list"]
    r = viscosity_sweep(shared, data, eps, cfg.n_paths, cfg.master_seed, cfg.workers)
    cols = ["eps", "sup_l2", "sup_l2_ci", "sup_l4", "sup_l4_ci", "dissipation", "dissipation_ci",
            "dissipation_sq", "dissipation_sq_ci"]
    f1 = write_csv(out / "sweep_energy.csv", conf, cols, ([row[c] for c in cols] for row in r.energy_rows))
    f2 = write_csv(out / "sweep_cauchy.csv", conf, ["eps_k", "eps_k1", "cauchy_l1", "ci_halfwidth"],
                   zip(r.eps_list[:-1], r.eps_list[1:], r.cauchy_l1, r.cauchy_ci))
    energy = energy_uniformity(r)
    predicates = {
        "cauchy_nonincreasing": r.cauchy_nonincreasing,
        "energy_ratio_below_2": energy["ratio_ok"],
        "energy_no_growth_trend": energy["no_growth"],
    }
    metrics = {"dt": r.dt, "n_paths": r.n_paths, "n_aborted": r.n_aborted, "energy": energy}
    return predicates, metrics, [f1, f2]


def _kinetic(cfg: RunConfig, out: Path, conf: dict):
    shared = cfg.build_shared()
    data = cfg.build_data(shared)
    o = cfg.options
    r = kinetic_experiment(shared, data, cfg.n_paths, cfg.master_seed, cfg.workers,
                           layer_widths=o["layer_widths"], moment_p=o["moment_p"])
    files = [write_csv(out / "kinetic_tails.csv", conf, ["xi", "mu_m", "mu_nu", "mu_m_slope", "mu_nu_slope"],
                       zip(r.xi, r.mu_m, r.mu_nu, r.mu_m_slope, r.mu_nu_slope))]
    predicates = {"mu_nonincreasing": r.mu_monotone}
    over = [r.overflow_by_R[k] for k in sorted(r.overflow_by_R)]
    predicates["overflow_nonincreasing"] = all(b <= a for a, b in zip(over, over[1:]))
    predicates["overflow_small"] = over[-1] < OVERFLOW_FRACTION * r.total_mass if r.total_mass > 0 else over[-1] == 0.0
    predicates["chebyshev_moment"] = r.moment_check["holds"]
    side_metrics = {}
    for side, widths in r.sides.items():
        w = widths[0]
        dm = w["defect"]
        files.append(write_csv(
            out / f"kinetic_{side}.csv", conf, ["t", "xi", "f_bar", "m_bar_plus", "bln_value"],
            ((t, x, fb, mp, bv) for t, fr, mr, br in zip(dm.times, w["trace"].f_bar, dm.m_bar_plus, w["bln"])
             for x, fb, mp, bv in zip(dm.xi, fr, mr, br)),
        ))
        predicates[f"{side}_defect_zero_at_N"] = w["m_plus_at_N"] == 0.0
        predicates[f"{side}_defect_nonnegative"] = w["m_plus_min"] >= -DEFECT_TOL
        side_metrics[side] = [{k: v for k, v in x.items() if k not in ("trace", "defect", "bln")} for x in widths]
    metrics = {"N": r.N, "N0": r.N0, "overflow_by_R": r.overflow_by_R, "total_mass": r.total_mass,
               "moment_check": r.moment_check, "tail_report": r.tail_report, "sides": side_metrics,
               "n_paths": r.n_paths, "n_aborted": r.n_aborted, "defect_tolerance": DEFECT_TOL}
    return predicates, metrics, files


def _validate(cfg: RunConfig, out: Path, conf: dict):
    suite = cfg.options["suite"]
    rep = deterministic_validation(suite)
    files = []
    if suite == "riemann_rarefaction":
        files.append(write_csv(out / "validate_riemann_rarefaction.csv", conf, ["dx", "error", "bound"],
                               zip(rep["dx"], rep["errors"], rep["bounds"])))
    predicates = dict(rep["checks"]) if "checks" in rep else {suite: rep["passed"]}
    metrics = {k: v for k, v in rep.items() if k not in ("checks", "passed")}
    return predicates, metrics, files


_RUNNERS = {
    "solve": _solve, "contraction": _contraction, "reduction": _reduction,
    "sweep": _sweep, "kinetic": _kinetic, "validate": _validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skl", description=__doc__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        if name == "validate":
            p.add_argument("suite", nargs="?", choices=SUITES, help="oracle suite (default from config or riemann_shock)")
        p.add_argument("--config", help="TOML or JSON run configuration; built-in scenario if omitted")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--workers", type=int, help="worker processes (falls back to $SKL_WORKERS)")
        p.add_argument("--out", help="output directory (overrides output_dir)")
    return parser


def _resolve(args) -> RunConfig:
    if args.config:
        cfg = load_config(args.config)
        if cfg.experiment != args.experiment:
            raise ConfigError(f"experiment: config says {cfg.experiment!r}, command line says {args.experiment!r}")
    else:
        cfg = config_from_dict(default_document(args.experiment))
    if args.experiment == "validate" and getattr(args, "suite", None):
        cfg.options["suite"] = args.suite
    if args.seed is not None:
        cfg.master_seed = args.seed
    workers = args.workers
    if workers is None and os.environ.get("SKL_WORKERS"):
        try:
            workers = int(os.environ["SKL_WORKERS"])
        except ValueError:
            raise ConfigError(f"SKL_WORKERS: expected an integer, got {os.environ['SKL_WORKERS']!r}") from None
    if workers is not None:
        if workers < 1:
            raise ConfigError("workers: must be >= 1")
        cfg.workers = workers
    if args.out:
        cfg.output_dir = args.out
    return cfg


def run_cli(argv=None) -> int:
    """Exit code 0 if every predicate passed, 1 if one failed, 2 on config or runtime errors."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = _resolve(args)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        conf = cfg.resolved()
        predicates, metrics, files = _RUNNERS[cfg.experiment](cfg, out, conf)
        stem = f"validate_{cfg.options['suite']}" if cfg.experiment == "validate" else cfg.experiment
        summary = write_summary(out / f"{stem}_summary.json", conf, predicates, metrics, files)
    except (ConfigError, ValueError, RuntimeError, FloatingPointError, OSError) as err:
        print(f"skl: error: {err}", file=sys.stderr)
        return 2
    print(summary)
    failed = [k for k, v in predicates.items() if not v]
    if failed:
        print("failed predicates: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
