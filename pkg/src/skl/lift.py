"""Heat-equation lifting of the Dirichlet data.

Solves ``d_t w = eps * w_xx`` with ``w(0) = 0`` and ``w = u_b`` on the
boundary. Ghost cells hold the boundary samples directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .grid import BoundaryData, Field, Grid


@dataclass(frozen=True)
class LiftBounds:
    sup_u: float
    sup_grad: float
    sup_dt: float
    sup_eps_lap: float


@dataclass(frozen=True)
class LiftTrajectory:
    grid: Grid
    eps: float
    dt: float
    values: np.ndarray  # (n_steps + 1, n_cells)
    ghosts: np.ndarray  # (n_steps + 1, 2): boundary samples at each level
    bounds: LiftBounds

    @property
    def n_steps(self) -> int:
        return self.values.shape[0] - 1

    @property
    def fields(self) -> list[Field]:
        return [Field(row, self.grid) for row in self.values]

    def field(self, n: int) -> Field:
        return Field(self.values[n], self.grid)


def boundary_samples(b: BoundaryData, dt: float, n_steps: int) -> np.ndarray:
    """``(n_steps + 1, 2)`` array of boundary values on the grid ``t_n = n dt``."""
    times = dt * np.arange(n_steps + 1)
    if b.times.size == n_steps + 1 and np.allclose(b.times, times, rtol=0, atol=1e-12 * max(1.0, times[-1])):
        return np.column_stack([b.left, b.right])
    left, right = b.at(times)
    return np.column_stack([left, right])


def solve_lift(grid: Grid, b: BoundaryData, eps: float, dt: float, n_steps: int, method: str = "implicit") -> LiftTrajectory:
    """Backward-Euler (default) or forward-Euler heat lift on the solver time grid."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = grid.n_cells
    lam = eps * dt / grid.dx**2
    if method == "explicit" and lam > 0.5 + 1e-12:
        raise ValueError(
            f"explicit lift unstable: dt={dt} exceeds dx^2/(2 eps)={grid.dx**2 / (2 * eps)}"
        )
    if method not in ("implicit", "explicit"):
        raise ValueError(f"unknown lift method {method!r}")

    ghosts = boundary_samples(b, dt, n_steps)
    out = np.zeros((n_steps + 1, n))
    if lam > 0:
        if method == "implicit":
            ab = np.empty((3, n))
            ab[0, :] = -lam
            ab[1, :] = 1.0 + 2.0 * lam
            ab[2, :] = -lam
            rhs = np.empty(n)
            for k in range(n_steps):
                rhs[:] = out[k]
                rhs[0] += lam * ghosts[k + 1, 0]
                rhs[-1] += lam * ghosts[k + 1, 1]
                out[k + 1] = solve_banded((1, 1), ab, rhs, check_finite=False)
        else:
            for k in range(n_steps):
                w = out[k]
                padded = np.concatenate(([ghosts[k, 0]], w, [ghosts[k, 1]]))
                out[k + 1] = w + lam * (padded[2:] - 2.0 * w + padded[:-2])
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("lift produced non-finite values")
    out.setflags(write=False)
    ghosts.setflags(write=False)
    return LiftTrajectory(grid, float(eps), float(dt), out, ghosts, _bounds(out, ghosts, grid.dx, dt, eps))


def _bounds(vals: np.ndarray, ghosts: np.ndarray, dx: float, dt: float, eps: float) -> LiftBounds:
    padded = np.concatenate([ghosts[:, :1], vals, ghosts[:, 1:]], axis=1)
    grad = np.abs(np.diff(padded, axis=1)) / dx
    lap = (padded[:, 2:] - 2.0 * vals + padded[:, :-2]) / dx**2
    tdiff = np.abs(np.diff(vals, axis=0)) / dt if vals.shape[0] > 1 else np.zeros(1)
    return LiftBounds(
        sup_u=float(np.max(np.abs(vals))),
        sup_grad=float(np.max(grad)),
        sup_dt=float(np.max(tdiff)),
        sup_eps_lap=float(eps * np.max(np.abs(lap))),
    )
