"""Uniform 1-D finite-volume grid, cell-average fields and boundary data."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``(x_left, x_right)`` into ``n_cells`` cells.

    The outward normal is -1 at ``x_left`` and +1 at ``x_right``.
    """

    x_left: float
    x_right: float
    n_cells: int
    dx: float = field(init=False)
    cell_centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_left) and math.isfinite(self.x_right)):
            raise ValueError("grid endpoints must be finite")
        if not self.x_left < self.x_right:
            raise ValueError(f"need x_left < x_right, got {self.x_left} >= {self.x_right}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValueError(f"n_cells must be an integer >= 2, got {self.n_cells}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        dx = (self.x_right - self.x_left) / self.n_cells
        centers = self.x_left + (np.arange(self.n_cells) + 0.5) * dx
        centers.setflags(write=False)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "cell_centers", centers)

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    def normal(self, side: str) -> float:
        if side == "left":
            return -1.0
        if side == "right":
            return 1.0
        raise ValueError(f"unknown side {side!r}")

    def field(self, values) -> "Field":
        return Field(np.asarray(values, dtype=float), self)


def make_grid(x_left: float, x_right: float, n_cells: int) -> Grid:
    return Grid(float(x_left), float(x_right), n_cells)


@dataclass(frozen=True)
class Field:
    """Cell averages of a function on the grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_cells,):
            raise ValueError(
                f"field has shape {values.shape}, grid expects ({self.grid.n_cells},)"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __mul__(self, c: float) -> "Field":
        return Field(self.values * c, self.grid)

    __rmul__ = __mul__

    def __add__(self, other: "Field") -> "Field":
        return Field(self.values + other.values, self.grid)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.values - other.values, self.grid)


def l1_norm(f: Field) -> float:
    """Midpoint quadrature of the L1 norm, ``dx * sum |f_i|``."""
    return float(f.grid.dx * np.sum(np.abs(f.values)))


@dataclass(frozen=True)
class BoundaryData:
    """Boundary values sampled on the solver time grid.

    ``left[n]`` and ``right[n]`` hold the Dirichlet datum at ``times[n]``.
    Off-grid queries are linearly interpolated.
    """

    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    sup_norm: float = field(init=False)

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        left = np.array(self.left, dtype=float)
        right = np.array(self.right, dtype=float)
        if not (times.shape == left.shape == right.shape) or times.ndim != 1 or times.size == 0:
            raise ValueError("boundary times/left/right must be equal-length 1-D sequences")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("boundary sample times must be strictly increasing")
        if not (np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise ValueError("boundary values must be finite")
        for arr in (times, left, right):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        sup = max(float(np.max(np.abs(left))), float(np.max(np.abs(right))))
        object.__setattr__(self, "sup_norm", sup)

    @classmethod
    def from_functions(cls, left, right, times) -> "BoundaryData":
        times = np.asarray(times, dtype=float)
        return cls(times, np.array([left(t) for t in times]), np.array([right(t) for t in times]))

    @classmethod
    def constant(cls, left: float, right: float, times) -> "BoundaryData":
        times = np.asarray(times, dtype=float)
        return cls(times, np.full(times.shape, float(left)), np.full(times.shape, float(right)))

    def at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Interpolated ``(left, right)`` values at time(s) ``t``."""
        return (
            np.interp(t, self.times, self.left),
            np.interp(t, self.times, self.right),
        )

    def resample(self, times) -> "BoundaryData":
        left, right = self.at(np.asarray(times, dtype=float))
        return BoundaryData(times, left, right)

    def side(self, side: str) -> np.ndarray:
        if side == "left":
            return self.left
        if side == "right":
            return self.right
        raise ValueError(f"unknown side {side!r}")
