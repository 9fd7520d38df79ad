"""Kinetic diagnostics: ``1_{u > xi}``, the parabolic dissipation measure,
tail functions, near-boundary traces and truncated boundary defect measures.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import _kernels_py
from .flux import FluxModel, max_speed
from .grid import BoundaryData, Field, Grid


@dataclass(frozen=True)
class XiGrid:
    """Uniform velocity grid on ``[-N, N]``."""

    N: float
    n_bins: int
    edges: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.N > 0:
            raise ValueError(f"xi-grid N must be positive, got {self.N}")
        if self.n_bins < 1:
            raise ValueError(f"n_bins must be >= 1, got {self.n_bins}")
        edges = np.linspace(-self.N, self.N, self.n_bins + 1)
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def width(self) -> float:
        return 2.0 * self.N / self.n_bins

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def default_xi_grid(u0_sup: float, ub_sup: float, n_bins: int = 256) -> XiGrid:
    return XiGrid(4.0 * max(u0_sup, ub_sup, 1.0), n_bins)


@dataclass(frozen=True)
class KineticHistogram:
    """Dissipation mass binned by the value of ``u`` at which it occurs."""

    xi: XiGrid
    mass: np.ndarray
    overflow_lo: float = 0.0
    overflow_hi: float = 0.0

    @classmethod
    def empty(cls, xi: XiGrid) -> "KineticHistogram":
        return cls(xi, np.zeros(xi.n_bins))

    @property
    def total(self) -> float:
        return float(self.mass.sum() + self.overflow_lo + self.overflow_hi)

    def __add__(self, other: "KineticHistogram") -> "KineticHistogram":
        if other.xi != self.xi:
            raise ValueError("cannot merge histograms on different xi-grids")
        return KineticHistogram(
            self.xi,
            self.mass + other.mass,
            self.overflow_lo + other.overflow_lo,
            self.overflow_hi + other.overflow_hi,
        )

    def tail(self, xi) -> np.ndarray:
        """Mass on ``(xi, inf)``; bins are treated as uniformly filled."""
        xi = np.asarray(xi, dtype=float)
        lo = self.xi.edges[:-1]
        frac = np.clip((self.xi.edges[1:] - xi[..., None]) / self.xi.width, 0.0, 1.0)
        frac = np.where(lo >= xi[..., None], 1.0, frac)
        return self.overflow_hi + np.sum(frac * self.mass, axis=-1)

    def lower_tail(self, xi) -> np.ndarray:
        """Mass on ``(-inf, xi)``."""
        xi = np.asarray(xi, dtype=float)
        frac = np.clip((xi[..., None] - self.xi.edges[:-1]) / self.xi.width, 0.0, 1.0)
        return self.overflow_lo + np.sum(frac * self.mass, axis=-1)

    def mass_outside(self, R: float) -> float:
        """Mass with ``|xi| >= R``."""
        if R >= self.xi.N:
            return float(self.overflow_lo + self.overflow_hi)
        return float(self.tail(R) + self.lower_tail(-R))


def kinetic_function(u: float, xi: float) -> int:
    """``1`` if ``u > xi`` else ``0``."""
    return 1 if u > xi else 0


def kinetic_conjugate(u: float, xi: float) -> int:
    """``f_- = f_+ - 1 = -1_{u <= xi}``."""
    return kinetic_function(u, xi) - 1


def accumulate_defect(hist: KineticHistogram, u: Field, eps: float, dt: float) -> KineticHistogram:
    """Add ``eps |u_x|^2 dx dt`` to the bin holding ``u_i``, cell by cell.

    Central differences in the interior, one-sided in the two
    boundary-adjacent cells.
    """
    if eps == 0.0:
        return hist
    mass = hist.mass.copy()
    over = np.array([hist.overflow_lo, hist.overflow_hi])
    _kernels_py.accumulate_gradient(mass, over, u.values, eps, dt, u.grid.dx, hist.xi.N, hist.xi.n_bins)
    return KineticHistogram(hist.xi, mass, float(over[0]), float(over[1]))


def _clamp(xi, N: float):
    xi = np.asarray(xi, dtype=float)
    if np.any(np.abs(xi) > N):
        warnings.warn(f"xi outside [-{N}, {N}] clamped to the grid", RuntimeWarning, stacklevel=3)
        xi = np.clip(xi, -N, N)
    return xi


def mu_m(ens: Sequence[KineticHistogram], xi):
    """Ensemble mean of the dissipation mass above ``xi``."""
    if len(ens) == 0:
        raise ValueError("empty ensemble")
    xi_c = _clamp(xi, ens[0].xi.N)
    vals = np.mean([h.tail(xi_c) for h in ens], axis=0)
    return float(vals) if np.ndim(vals) == 0 else vals


def snapshot_weights(times: np.ndarray) -> np.ndarray:
    """Left-rectangle time weights; the final snapshot carries none."""
    w = np.zeros(len(times))
    w[:-1] = np.diff(times)
    return w


def occupation_tail(u_values: np.ndarray, times: np.ndarray, dx: float, xi) -> np.ndarray:
    """``sum_n w_n dx #{i : u(t_n, x_i) > xi}`` for every requested ``xi``."""
    w = snapshot_weights(times)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.zeros(xi.shape)
    for wn, row in zip(w, u_values):
        if wn == 0.0:
            continue
        srt = np.sort(row)
        above = row.size - np.searchsorted(srt, xi, side="right")
        out += wn * dx * above
    return out


def mu_nu(traj_ens: Sequence, xi):
    """Ensemble mean of the Young-measure tail ``int_Q nu_{t,x}(xi, inf) dx dt``.

    Each element needs ``times``, ``u`` (snapshots x cells) and ``grid``.
    """
    if len(traj_ens) == 0:
        raise ValueError("empty ensemble")
    scalar = np.ndim(xi) == 0
    vals = np.mean([occupation_tail(tr.u, tr.times, tr.grid.dx, xi) for tr in traj_ens], axis=0)
    return float(vals[0]) if scalar else vals


def moment_integral(traj_ens: Sequence, p: float) -> float:
    """Ensemble mean of ``int_Q |u|^p dx dt`` (time weights as in ``mu_nu``)."""
    vals = []
    for tr in traj_ens:
        w = snapshot_weights(tr.times)
        vals.append(float(np.sum(w[:, None] * np.abs(tr.u) ** p) * tr.grid.dx))
    return float(np.mean(vals))


def tail_decay_report(xi: np.ndarray, mu: np.ndarray, levels: Iterable[float], p: float = 0.0) -> dict:
    """Central-difference slopes of a sampled tail function at ``+-levels``."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    h = float(np.min(np.diff(xi)))
    rows = []
    for lev in levels:
        lev = float(lev)
        sp = (np.interp(lev + h, xi, mu) - np.interp(lev - h, xi, mu)) / (2 * h)
        sm = (np.interp(-lev + h, xi, mu) - np.interp(-lev - h, xi, mu)) / (2 * h)
        rows.append({
            "level": lev,
            "slope_plus": float(sp),
            "slope_minus": float(sm),
            "weighted_plus": float(abs(lev) ** p * sp),
            "weighted_minus": float(abs(lev) ** p * sm),
        })
    mags = [max(abs(r["weighted_plus"]), abs(r["weighted_minus"])) for r in rows]
    return {
        "p": p,
        "rows": rows,
        "nonincreasing_magnitude": all(b <= a + 1e-15 for a, b in zip(mags, mags[1:])),
    }


def slopes(xi: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return np.gradient(np.asarray(mu, dtype=float), np.asarray(xi, dtype=float))


# -- boundary traces and defect measures ---------------------------------------

@dataclass(frozen=True)
class BoundaryTrace:
    """Layer average of ``1_{u > xi}`` next to one boundary point.

    ``f_bar`` has shape ``(len(times), n_bins + 1)`` and is evaluated at the
    xi-grid edges.
    """

    side: str
    layer_width: float
    xi: XiGrid
    times: np.ndarray
    f_bar: np.ndarray


def layer_cells(grid: Grid, side: str, layer_width: float) -> np.ndarray:
    if side == "left":
        dist = grid.cell_centers - grid.x_left
    elif side == "right":
        dist = grid.x_right - grid.cell_centers
    else:
        raise ValueError(f"unknown side {side!r}")
    idx = np.nonzero(dist <= layer_width + 1e-12 * grid.dx)[0]
    if idx.size == 0:
        raise ValueError(f"layer_width={layer_width} contains no cells (dx={grid.dx})")
    return idx


def trace_from_values(u_values: np.ndarray, times: np.ndarray, grid: Grid, side: str, layer_width: float, xi: XiGrid) -> BoundaryTrace:
    cells = layer_cells(grid, side, layer_width)
    layer = np.asarray(u_values)[:, cells]
    f = (layer[:, :, None] > xi.edges[None, None, :]).mean(axis=1)
    return BoundaryTrace(side, float(layer_width), xi, np.asarray(times, dtype=float), f)


def boundary_trace(traj, side: str, layer_width: float, xi: XiGrid) -> BoundaryTrace:
    return trace_from_values(traj.u, traj.times, traj.grid, side, layer_width, xi)


def average_traces(traces: Sequence[BoundaryTrace]) -> BoundaryTrace:
    if not traces:
        raise ValueError("no traces to average")
    return replace(traces[0], f_bar=np.mean([t.f_bar for t in traces], axis=0))


@dataclass(frozen=True)
class DefectMeasure:
    side: str
    N: float
    M_N: float
    xi: np.ndarray
    times: np.ndarray
    m_bar_plus: np.ndarray
    m_bar_minus: np.ndarray


def _boundary_values(trace: BoundaryTrace, b: BoundaryData) -> np.ndarray:
    left, right = b.at(trace.times)
    return np.asarray(left if trace.side == "left" else right, dtype=float)


def _check_level(b: BoundaryData, N: float, trace: BoundaryTrace) -> None:
    if not N > b.sup_norm:
        raise ValueError(f"truncation level N={N} must exceed sup|u_b|={b.sup_norm}")
    if abs(N - trace.xi.N) > 1e-12 * N:
        raise ValueError(f"trace xi-grid spans [-{trace.xi.N}, {trace.xi.N}], not [-{N}, {N}]")


def defect_measure(trace: BoundaryTrace, b: BoundaryData, flux: FluxModel, N: float | None = None) -> DefectMeasure:
    """Truncated boundary defect measures by trapezoid quadrature.

    ``m+(xi) = M_N (u_b - xi)^+ - int_xi^N (-a(eta) n) f(eta) deta`` and
    ``m-(xi) = M_N (xi - u_b)^+ + int_{-N}^xi (-a(eta) n) (f(eta) - 1) deta``.
    """
    N = trace.xi.N if N is None else float(N)
    _check_level(b, N, trace)
    M_N = max_speed(flux, N)
    n = -1.0 if trace.side == "left" else 1.0
    xi = trace.xi.edges
    h = trace.xi.width
    ub = _boundary_values(trace, b)[:, None]
    speed = -np.asarray(flux.a(xi), dtype=float) * n
    q_plus = speed[None, :] * trace.f_bar
    seg = 0.5 * (q_plus[:, 1:] + q_plus[:, :-1]) * h
    from_right = np.zeros_like(q_plus)
    from_right[:, :-1] = np.cumsum(seg[:, ::-1], axis=1)[:, ::-1]
    m_plus = M_N * np.maximum(ub - xi[None, :], 0.0) - from_right
    q_minus = speed[None, :] * (trace.f_bar - 1.0)
    seg = 0.5 * (q_minus[:, 1:] + q_minus[:, :-1]) * h
    from_left = np.zeros_like(q_minus)
    from_left[:, 1:] = np.cumsum(seg, axis=1)
    m_minus = M_N * np.maximum(xi[None, :] - ub, 0.0) + from_left
    return DefectMeasure(trace.side, N, M_N, xi.copy(), trace.times.copy(), m_plus, m_minus)


def remark_residual(dm: DefectMeasure, flux: FluxModel) -> np.ndarray:
    """``m- - m+ - [M_N (xi + N) + (A(xi) - A(-N)) n] + m+(-N)``; zero up to quadrature."""
    n = -1.0 if dm.side == "left" else 1.0
    xi = dm.xi
    expected = dm.M_N * (xi + dm.N) + (np.asarray(flux.A(xi)) - flux.A(-dm.N)) * n
    return dm.m_bar_minus - dm.m_bar_plus - expected[None, :] + dm.m_bar_plus[:, :1]


def bln_values(trace: BoundaryTrace, b: BoundaryData, flux: FluxModel, N: float | None = None) -> np.ndarray:
    """``M_N 1_{u_b > xi} + a(xi) n f(t, xi)`` on the trace grid."""
    N = trace.xi.N if N is None else float(N)
    _check_level(b, N, trace)
    M_N = max_speed(flux, N)
    n = -1.0 if trace.side == "left" else 1.0
    xi = trace.xi.edges
    ub = _boundary_values(trace, b)[:, None]
    return M_N * (ub > xi[None, :]) + np.asarray(flux.a(xi), dtype=float)[None, :] * n * trace.f_bar


def bln_check(trace: BoundaryTrace, b: BoundaryData, flux: FluxModel, N: float | None = None) -> float:
    """Smallest BLN value over time and the open interval ``(-N, N)``."""
    return float(np.min(bln_values(trace, b, flux, N)[:, 1:-1]))


def reconstruct_from_kinetic(u_values, xi: XiGrid) -> np.ndarray:
    """``int (1_{u > xi} - 1_{xi < 0}) dxi`` by the midpoint rule on the xi-grid."""
    u = np.asarray(u_values, dtype=float)
    c = xi.centers
    integrand = (u[..., None] > c).astype(float) - (c < 0).astype(float)
    return integrand.sum(axis=-1) * xi.width
