"""Viscous stochastic finite-volume solver.

Advances ``v`` with zero Dirichlet data,

    v_i <- v_i - dt/dx (F_{i+1/2} - F_{i-1/2}) + eps dt/dx^2 (v_{i+1} - 2 v_i + v_{i-1})
           + sum_k g_k(x_i, w_i) dbeta_k,

where ``w = v + lift`` feeds the flux and the noise, and reports
``u = v + lift``. The path loop itself lives in the kernel backends.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import _backend, _kernels_py
from .flux import FluxModel, Scheme, SpeedCap, max_speed
from .grid import BoundaryData, Field, Grid
from .kinetic import KineticHistogram, XiGrid, default_xi_grid
from .lift import LiftTrajectory, boundary_samples, solve_lift
from .noise import NoiseModel, WienerPath

_TINY = 1e-300


class BlowUpError(FloatingPointError):
    def __init__(self, step: int, message: str | None = None):
        self.step = int(step)
        super().__init__(message or f"non-finite state at step {step}")


@dataclass(frozen=True)
class SolverConfig:
    eps: float
    t_end: float
    cfl: float = 0.5
    scheme: str = "godunov"
    K: int = 8
    seed: int = 0
    record_every: int = 1
    xi_N: Optional[float] = None
    n_bins: int = 256
    formulation: str = "shifted"
    lift_method: str = "implicit"
    speed_N: Optional[float] = None
    dt: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.eps >= 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.K < 0:
            raise ValueError(f"K must be >= 0, got {self.K}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.xi_N is not None and not self.xi_N > 0:
            raise ValueError(f"xi_grid N must be positive, got {self.xi_N}")
        if self.n_bins < 8:
            raise ValueError(f"n_bins must be >= 8, got {self.n_bins}")
        if self.formulation not in ("shifted", "direct"):
            raise ValueError(f"unknown formulation {self.formulation!r}")
        Scheme.parse(self.scheme)


def cfl_dt(grid: Grid, cap: SpeedCap, eps: float, cfl: float) -> float:
    """``cfl * min(dx / M_N, dx^2 / (2 eps))``."""
    if cap.M_N <= 0 and eps <= 0:
        raise ValueError("zero flux speed and zero viscosity: no stability constraint defines dt")
    return cfl * min(grid.dx / max(cap.M_N, _TINY), grid.dx**2 / (2.0 * eps + _TINY))


def data_sup(u0: Field, b: BoundaryData) -> float:
    return max(float(np.max(np.abs(u0.values))), b.sup_norm)


def speed_level(cfg: SolverConfig, u0: Field, b: BoundaryData) -> float:
    """Truncation level used for the CFL speed cap (and the Lax-Friedrichs bound)."""
    if cfg.speed_N is not None:
        return float(cfg.speed_N)
    factor = 1.0 if cfg.K == 0 else 2.0
    return factor * max(data_sup(u0, b), 1.0)


@dataclass(frozen=True)
class Problem:
    """Everything a path needs that does not depend on the noise draw."""

    grid: Grid
    cfg: SolverConfig
    flux: FluxModel
    noise: NoiseModel
    u0: Field
    b: BoundaryData
    dt: float
    n_steps: int
    alpha: float
    xi: XiGrid
    lift: LiftTrajectory
    ghost_v: np.ndarray
    ghost_w: np.ndarray
    lift_values: np.ndarray
    modes: np.ndarray
    rec_steps: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.rec_steps * self.dt

    @property
    def step_times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


def time_grid(t_end: float, dt_max: float) -> tuple[float, int]:
    n_steps = max(1, math.ceil(t_end / dt_max - 1e-9))
    return t_end / n_steps, n_steps


def prepare(grid: Grid, cfg: SolverConfig, u0: Field, b: BoundaryData, flux: FluxModel, noise: NoiseModel, dt: float | None = None) -> Problem:
    if noise.K != cfg.K:
        raise ValueError(f"noise model has {noise.K} modes, config asks for K={cfg.K}")
    if u0.grid != grid:
        raise ValueError("initial field lives on a different grid")
    level = speed_level(cfg, u0, b)
    cap = SpeedCap(level, max_speed(flux, level))
    dt = dt if dt is not None else cfg.dt
    if dt is None:
        dt, n_steps = time_grid(cfg.t_end, cfl_dt(grid, cap, cfg.eps, cfg.cfl))
    else:
        dt, n_steps = time_grid(cfg.t_end, dt)
    xi_N = cfg.xi_N if cfg.xi_N is not None else default_xi_grid(float(np.max(np.abs(u0.values))), b.sup_norm).N
    xi = XiGrid(xi_N, cfg.n_bins)
    if cfg.formulation == "shifted":
        lift = solve_lift(grid, b, cfg.eps, dt, n_steps, method=cfg.lift_method)
        ghost_w = np.array(lift.ghosts)
        ghost_v = np.zeros_like(ghost_w)
        lift_values = lift.values
    else:
        ghost_w = boundary_samples(b, dt, n_steps)
        ghost_v = ghost_w
        lift_values = np.zeros((n_steps + 1, grid.n_cells))
        lift = LiftTrajectory(grid, cfg.eps, dt, lift_values, ghost_w, solve_lift(grid, b, 0.0, dt, 1).bounds)
    rec = list(range(0, n_steps + 1, cfg.record_every))
    if rec[-1] != n_steps:
        rec.append(n_steps)
    modes = noise.mode_matrix(grid.cell_centers) if (noise.K > 0 and noise.kind != "custom") else np.zeros((grid.n_cells, noise.K))
    return Problem(
        grid=grid, cfg=cfg, flux=flux, noise=noise, u0=u0, b=b, dt=dt, n_steps=n_steps,
        alpha=cap.M_N, xi=xi, lift=lift,
        ghost_v=np.ascontiguousarray(ghost_v, dtype=float),
        ghost_w=np.ascontiguousarray(ghost_w, dtype=float),
        lift_values=np.ascontiguousarray(lift_values, dtype=float),
        modes=np.ascontiguousarray(modes, dtype=float),
        rec_steps=np.asarray(rec, dtype=np.int64),
    )


@dataclass
class Trajectory:
    grid: Grid
    times: np.ndarray
    u: np.ndarray  # (n_snapshots, n_cells)
    v: np.ndarray
    defect_hist: KineticHistogram
    lp_norms: dict  # p -> (n_snapshots,)
    dissipation: dict  # p -> (n_snapshots,), cumulative eps * int |v|^{p-2} |v_x|^2
    sup_lp: dict  # p -> sup over every step of ||v||_p^p
    boundary_flux: np.ndarray  # cumulative boundary mass flux into v
    noise_mass: np.ndarray  # cumulative mass injected by the noise
    seed: int = 0

    @property
    def u_snapshots(self) -> list[Field]:
        return [Field(row, self.grid) for row in self.u]

    @property
    def v_snapshots(self) -> list[Field]:
        return [Field(row, self.grid) for row in self.v]


def run_problem(problem: Problem, path: WienerPath, backend: str | None = None) -> Trajectory:
    cfg = problem.cfg
    if path.K != cfg.K:
        raise ValueError(f"path has {path.K} modes, config asks for K={cfg.K}")
    if path.n_steps < problem.n_steps or abs(path.dt - problem.dt) > 1e-12 * problem.dt:
        raise ValueError(
            f"path grid (n_steps={path.n_steps}, dt={path.dt}) does not match the solver grid "
            f"(n_steps={problem.n_steps}, dt={problem.dt})"
        )
    incr = np.ascontiguousarray(path.increments[: problem.n_steps], dtype=float)
    out = _backend.advance_path(
        np.ascontiguousarray(problem.u0.values, dtype=float), problem.lift_values, problem.ghost_v,
        problem.ghost_w, incr, problem.modes, problem.grid.cell_centers,
        int(problem.flux.kernel_code), float(problem.flux.param), int(Scheme.parse(cfg.scheme)),
        float(problem.alpha), int(problem.noise.kernel_code), float(problem.noise.shift),
        float(problem.noise.r_clip), float(cfg.eps), float(problem.dt), float(problem.grid.dx),
        problem.rec_steps, float(problem.xi.N), int(problem.xi.n_bins),
        flux_model=problem.flux, noise_model=problem.noise, backend=backend,
    )
    status, v_snap, u_snap, hist, over_lo, over_hi, sup_lp, grad_acc, bflux, nmass = out
    if status >= 0:
        raise BlowUpError(status)
    dx = problem.grid.dx
    lp = {p: dx * np.sum(np.abs(v_snap) ** p, axis=1) for p in (2, 4)}
    diss = {2: cfg.eps * grad_acc[:, 0], 4: cfg.eps * grad_acc[:, 1]}
    return Trajectory(
        grid=problem.grid,
        times=problem.times,
        u=u_snap,
        v=v_snap,
        defect_hist=KineticHistogram(problem.xi, hist, float(over_lo), float(over_hi)),
        lp_norms=lp,
        dissipation=diss,
        sup_lp={2: float(sup_lp[0]), 4: float(sup_lp[1])},
        boundary_flux=bflux,
        noise_mass=nmass,
        seed=path.seed,
    )


def run(grid: Grid, cfg: SolverConfig, u0: Field, b: BoundaryData, flux: FluxModel, noise: NoiseModel, path: WienerPath, backend: str | None = None) -> Trajectory:
    """Solve one path from ``v(0) = u0``; the path's ``dt`` fixes the time grid."""
    problem = prepare(grid, cfg, u0, b, flux, noise, dt=path.dt)
    return run_problem(problem, path, backend=backend)


def step(v: Field, lift: Field, dt: float, increments, cfg: SolverConfig, model: FluxModel, noise: NoiseModel, boundary=(0.0, 0.0), alpha: float | None = None) -> Field:
    """One explicit step of the shifted problem.

    ``boundary`` holds the Dirichlet data seen by ``w = v + lift`` in the
    ghost cells; ``v`` itself has zero ghosts.
    """
    grid = v.grid
    w = v.values + lift.values
    scheme = Scheme.parse(cfg.scheme)
    if alpha is None and scheme == Scheme.LAX_FRIEDRICHS:
        level = max(float(np.max(np.abs(w))), abs(boundary[0]), abs(boundary[1]), 1e-12)
        alpha = max_speed(model, level)
    F = _kernels_py.face_fluxes(w, boundary[0], boundary[1], model.kernel_code, model.param, scheme, alpha or 0.0, model)
    vp = np.concatenate(([0.0], v.values, [0.0]))
    new = (
        v.values
        - dt / grid.dx * (F[1:] - F[:-1])
        + cfg.eps * dt / grid.dx**2 * (vp[2:] - 2.0 * v.values + vp[:-2])
    )
    dbeta = np.asarray(increments, dtype=float).reshape(-1)
    if dbeta.size:
        new = new + noise.increment_array(grid.cell_centers, w, dbeta)
    if not np.all(np.isfinite(new)):
        raise BlowUpError(0)
    return Field(new, grid)


@dataclass(frozen=True)
class EnergyRecord:
    lp_p: float
    dissipation: float


def energy_functional(v: Field, grad_sq_accum: float, p: int, eps: float) -> EnergyRecord:
    """``(dx sum |v|^p, eps * grad_sq_accum)``; the caller accumulates the gradient term."""
    if p < 2 or p % 2:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    return EnergyRecord(float(v.grid.dx * np.sum(np.abs(v.values) ** p)), float(eps * grad_sq_accum))


def gradient_term(v: Field, p: int, dt: float) -> float:
    """``sum_i |v_i|^{p-2} ((v_{i+1} - v_i)/dx)^2 dx dt`` over interior faces."""
    dx = v.grid.dx
    vals = v.values
    dv = np.diff(vals) / dx
    return float(np.sum(np.abs(vals[:-1]) ** (p - 2) * dv * dv) * dx * dt)


# -- snapshot dump ---------------------------------------------------------------

def dump_snapshots(traj: Trajectory, path, meta: dict | None = None, which: str = "u") -> None:
    """Header line of ``key=value`` metadata, then ``time,values...`` per snapshot."""
    grid = traj.grid
    head = {"x_left": grid.x_left, "x_right": grid.x_right, "n_cells": grid.n_cells}
    head.update(meta or {})
    header = " ".join(f"{k}={json.dumps(v, sort_keys=True, separators=(',', ':'))}" for k, v in head.items())
    data = traj.u if which == "u" else traj.v
    lines = ["# " + header]
    for t, row in zip(traj.times, data):
        lines.append(",".join([repr(float(t))] + [repr(float(x)) for x in row]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_snapshots(path) -> tuple[dict, np.ndarray, np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    meta = {}
    for tok in lines[0][2:].split(" "):
        k, _, v = tok.partition("=")
        meta[k] = json.loads(v)
    rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:] if ln])
    return meta, rows[:, 0], rows[:, 1:]
