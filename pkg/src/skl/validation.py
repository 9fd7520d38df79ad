"""Deterministic (K = 0) oracle runs: Riemann problems and a boundary layer."""
from __future__ import annotations

import math

import numpy as np

from .flux import burgers
from .grid import BoundaryData, Field, Grid, make_grid
from .kinetic import bln_check, defect_measure, trace_from_values
from .noise import sample_path, zero_noise
from .profiles import initial_profile
from .solver import SolverConfig, prepare, run_problem

SUITES = ("riemann_shock", "riemann_rarefaction", "boundary_layer")


def _solve(grid: Grid, u0: Field, left: float, right: float, t_end: float, eps: float = 0.0,
           record_every: int = 10**9, cfl: float = 0.5, lift_method: str = "implicit"):
    cfg = SolverConfig(eps=eps, t_end=t_end, cfl=cfl, K=0, record_every=record_every, lift_method=lift_method)
    b = BoundaryData.constant(left, right, [0.0, t_end])
    prob = prepare(grid, cfg, u0, b, burgers(), zero_noise())
    traj = run_problem(prob, sample_path(0, prob.n_steps, prob.dt, 0))
    return prob, traj, b


def shock_front(grid: Grid, u: np.ndarray, level: float = 0.5) -> float:
    """First crossing of ``level`` from above, interpolated between cell centers."""
    x = grid.cell_centers
    idx = np.nonzero((u[:-1] >= level) & (u[1:] < level))[0]
    if idx.size == 0:
        raise ValueError("no front found")
    i = idx[0]
    return float(x[i] + (u[i] - level) / (u[i] - u[i + 1]) * grid.dx)


def riemann_shock(n_cells: int = 200, t_end: float = 0.5) -> dict:
    grid = make_grid(-1.0, 1.0, n_cells)
    u0 = initial_profile(grid, {"name": "riemann", "ul": 1.0, "ur": 0.0, "x0": 0.0})
    _, traj, _ = _solve(grid, u0, 1.0, 0.0, t_end)
    front = shock_front(grid, traj.u[-1])
    exact = 0.5 * t_end
    err = abs(front - exact)
    return {
        "suite": "riemann_shock", "n_cells": n_cells, "dx": grid.dx, "front": front,
        "exact_front": exact, "error": err, "tolerance": 2 * grid.dx, "passed": err <= 2 * grid.dx,
    }


def rarefaction_exact(x: np.ndarray, t: float, ul: float = -1.0, ur: float = 1.0) -> np.ndarray:
    return np.clip(x / t, ul, ur)


def rarefaction_l1_error(n_cells: int, t_end: float = 0.5) -> tuple[float, float]:
    grid = make_grid(-1.0, 1.0, n_cells)
    u0 = initial_profile(grid, {"name": "riemann", "ul": -1.0, "ur": 1.0, "x0": 0.0})
    _, traj, _ = _solve(grid, u0, -1.0, 1.0, t_end)
    sub = (np.arange(64) + 0.5) / 64 - 0.5
    xs = grid.cell_centers[:, None] + sub[None, :] * grid.dx
    exact = rarefaction_exact(xs, t_end).mean(axis=1)
    return grid.dx, float(grid.dx * np.sum(np.abs(traj.u[-1] - exact)))


def riemann_rarefaction(resolutions=(100, 200, 400), t_end: float = 0.5) -> dict:
    """L1 error against ``u = x/t`` with ``C`` fitted at the coarsest grid."""
    rows = [rarefaction_l1_error(n, t_end) for n in resolutions]
    dx0, e0 = rows[0]
    C = e0 / (dx0 * math.log(1.0 / dx0))
    bounds = [C * dx * math.log(1.0 / dx) for dx, _ in rows]
    within = [e <= bnd * (1 + 1e-12) for (_, e), bnd in zip(rows, bounds)]
    return {
        "suite": "riemann_rarefaction", "resolutions": list(resolutions), "dx": [r[0] for r in rows],
        "errors": [r[1] for r in rows], "C": C, "bounds": bounds,
        "ratio_to_bound": [e / bnd for (_, e), bnd in zip(rows, bounds)], "within": within, "passed": all(within),
    }


def boundary_layer(n_cells: int = 200, eps: float = 1e-3, t_end: float = 0.5, interior_limit: float = 0.9,
                   lift_method: str = "explicit") -> dict:
    """Outflow boundary with an incompatible datum: the datum is not attained.

    The explicit lift makes ``v + lift`` coincide with direct Dirichlet
    imposition, so the compatible left wall produces no splitting transient.
    """
    grid = make_grid(0.0, 1.0, n_cells)
    u0 = initial_profile(grid, {"name": "constant", "value": 1.0})
    prob, traj, b = _solve(grid, u0, 1.0, 0.0, t_end, eps=eps, record_every=1, lift_method=lift_method)
    interior = grid.cell_centers <= interior_limit
    dev = float(np.max(np.abs(traj.u[:, interior] - 1.0)))
    trace = trace_from_values(traj.u, traj.times, grid, "right", 4 * grid.dx, prob.xi)
    dm = defect_measure(trace, b, burgers())
    band = (dm.xi >= 0.0) & (dm.xi <= 0.5)
    m_min = float(np.min(dm.m_bar_plus[:, band]))
    bln = bln_check(trace, b, burgers())
    checks = {
        "interior_within_dx": dev <= grid.dx,
        "bln_nonnegative": bln >= -1e-2,
        "defect_positive": m_min > 0.1,
    }
    return {
        "suite": "boundary_layer", "n_cells": n_cells, "eps": eps, "dx": grid.dx,
        "interior_deviation": dev, "bln_min": bln, "m_plus_min_on_0_0.5": m_min,
        "checks": checks, "passed": all(checks.values()),
    }


def deterministic_validation(suite: str, **kw) -> dict:
    if suite == "riemann_shock":
        return riemann_shock(**kw)
    if suite == "riemann_rarefaction":
        return riemann_rarefaction(**kw)
    if suite == "boundary_layer":
        return boundary_layer(**kw)
    raise ValueError(f"unknown validation suite {suite!r}; choose from {SUITES}")
