"""Monte Carlo experiments over coupled path ensembles.

Every path index ``i`` draws its noise from ``path_seed(master_seed, i)``,
so an ensemble is the same whichever worker computes which path. Sums run
over results in path order through a fixed pairwise tree.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .flux import FluxModel, SpeedCap, boundary_speed_cap, max_speed
from .grid import BoundaryData, Field, Grid, l1_norm
from .kinetic import (
    KineticHistogram,
    XiGrid,
    average_traces,
    bln_check,
    bln_values,
    defect_measure,
    mu_m,
    occupation_tail,
    slopes,
    tail_decay_report,
    trace_from_values,
)
from .kinetic import snapshot_weights
from .lift import boundary_samples
from .noise import NoiseModel, path_seed, sample_path, zero_noise
from .solver import BlowUpError, Problem, SolverConfig, cfl_dt, data_sup, prepare, run_problem, speed_level, time_grid

Z95 = 1.959963984540054


@dataclass(frozen=True)
class Shared:
    grid: Grid
    cfg: SolverConfig
    flux: FluxModel
    noise: NoiseModel


@dataclass(frozen=True)
class Data:
    u0: Field
    b: BoundaryData


# -- deterministic reductions ----------------------------------------------------

def tree_sum(items: Sequence):
    """Pairwise sum with a topology fixed by ``len(items)`` alone."""
    items = list(items)
    if not items:
        raise ValueError("tree_sum of nothing")
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def mean_ci(samples: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Mean and 95% normal-approximation half-width, reduced by ``tree_sum``."""
    n = len(samples)
    arrs = [np.asarray(s, dtype=float) for s in samples]
    mean = tree_sum(arrs) / n
    if n < 2:
        return mean, np.zeros_like(mean)
    var = tree_sum([(a - mean) ** 2 for a in arrs]) / (n - 1)
    return mean, Z95 * np.sqrt(var / n)


# -- ensemble driver ----------------------------------------------------------------

_STATE: dict = {}


def _init_state(state: dict) -> None:
    _STATE.clear()
    _STATE.update(state)


def _seed_for(master_seed: int, index: int, antithetic: bool) -> tuple[int, float]:
    if antithetic:
        return path_seed(master_seed, index // 2), (-1.0 if index % 2 else 1.0)
    return path_seed(master_seed, index), 1.0


def _path_task(index: int):
    st = _STATE
    problems: Sequence[Problem] = st["problems"]
    seed, sign = _seed_for(st["master_seed"], index, st["antithetic"])
    p0 = problems[0]
    path = sample_path(seed, p0.n_steps, p0.dt, p0.cfg.K, sign=sign)
    try:
        trajs = [run_problem(p, path) for p in problems]
    except BlowUpError as err:
        return ("aborted", err.step)
    return ("ok", st["summarize"](trajs, problems))


def run_ensemble(problems: Sequence[Problem], summarize: Callable, n_paths: int, master_seed: int = 0,
                 workers: int = 1, antithetic: bool = False) -> tuple[list, int]:
    """Run every problem on each coupled path; returns (per-path summaries in order, n_aborted)."""
    dts = {p.dt for p in problems}
    steps = {p.n_steps for p in problems}
    if len(dts) != 1 or len(steps) != 1:
        raise ValueError("coupled problems must share one time grid")
    state = {"problems": list(problems), "summarize": summarize, "master_seed": int(master_seed), "antithetic": bool(antithetic)}
    if workers <= 1 or n_paths <= 1:
        saved = dict(_STATE)
        _init_state(state)
        try:
            results = [_path_task(i) for i in range(n_paths)]
        finally:
            _init_state(saved)
    else:
        chunk = max(1, n_paths // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_state, initargs=(state,)) as ex:
            results = list(ex.map(_path_task, range(n_paths), chunksize=chunk))
    ok = [r[1] for r in results if r[0] == "ok"]
    return ok, len(results) - len(ok)


def shared_dt(shared: Shared, datas: Sequence[Data], eps_list: Sequence[float] | None = None) -> float:
    """Largest stable step valid for every data set and every viscosity."""
    eps_list = [shared.cfg.eps] if eps_list is None else list(eps_list)
    if shared.cfg.dt is not None:
        return time_grid(shared.cfg.t_end, shared.cfg.dt)[0]
    dts = []
    for d in datas:
        level = speed_level(shared.cfg, d.u0, d.b)
        cap = SpeedCap(level, max_speed(shared.flux, level))
        for eps in eps_list:
            dts.append(cfl_dt(shared.grid, cap, eps, shared.cfg.cfl))
    return time_grid(shared.cfg.t_end, min(dts))[0]


def _prepare(shared: Shared, data: Data, dt: float, eps: float | None = None) -> Problem:
    cfg = shared.cfg if eps is None else replace(shared.cfg, eps=float(eps))
    return prepare(shared.grid, cfg, data.u0, data.b, shared.flux, shared.noise, dt=dt)


# -- contraction ---------------------------------------------------------------------

@dataclass
class ContractionReport:
    times: np.ndarray
    lhs: np.ndarray
    rhs_init: float
    rhs_boundary: np.ndarray
    ci_halfwidth: np.ndarray
    n_paths: int
    n_aborted: int
    M_b: float
    margin: float
    dx: float
    dt: float

    @property
    def bound(self) -> np.ndarray:
        return self.rhs_init + self.rhs_boundary

    @property
    def holds(self) -> np.ndarray:
        return self.lhs <= self.bound + self.ci_halfwidth + self.margin

    @property
    def passed(self) -> bool:
        return bool(np.all(self.holds))

    @property
    def excess(self) -> float:
        """Largest amount by which ``lhs`` exceeds the bound plus CI (0 if never)."""
        return float(max(0.0, np.max(self.lhs - self.bound - self.ci_halfwidth)))


def _l1_gaps(trajs, problems):
    dx = problems[0].grid.dx
    return dx * np.sum(np.abs(trajs[0].u - trajs[1].u), axis=1)


def boundary_l1(b1: BoundaryData, b2: BoundaryData, dt: float, n_steps: int) -> np.ndarray:
    """Cumulative ``int_0^{t_n} (|db_left| + |db_right|) dt`` on the step grid (left rectangles)."""
    s1 = boundary_samples(b1, dt, n_steps)
    s2 = boundary_samples(b2, dt, n_steps)
    per_step = np.abs(s1 - s2).sum(axis=1)[:-1] * dt
    return np.concatenate(([0.0], np.cumsum(per_step)))


def contraction_experiment(shared: Shared, data1: Data, data2: Data, n_paths: int, master_seed: int = 0,
                           workers: int = 1, margin_const: float = 10.0, antithetic: bool = False) -> ContractionReport:
    """Two solutions driven by one noise path per index; checks the L1 stability bound."""
    if n_paths < 2:
        raise ValueError("contraction experiment needs n_paths >= 2")
    dt = shared_dt(shared, [data1, data2])
    p1 = _prepare(shared, data1, dt)
    p2 = _prepare(shared, data2, dt)
    ok, aborted = run_ensemble([p1, p2], _l1_gaps, n_paths, master_seed, workers, antithetic)
    if not ok:
        raise RuntimeError("every path aborted")
    lhs, ci = mean_ci(ok)
    M_b = boundary_speed_cap(shared.flux, data1.b, data2.b)
    cum = boundary_l1(data1.b, data2.b, p1.dt, p1.n_steps)
    grid = shared.grid
    return ContractionReport(
        times=p1.times,
        lhs=lhs,
        rhs_init=l1_norm(data1.u0 - data2.u0),
        rhs_boundary=M_b * cum[p1.rec_steps],
        ci_halfwidth=ci,
        n_paths=n_paths,
        n_aborted=aborted,
        M_b=M_b,
        margin=margin_const * (grid.dx + math.sqrt(p1.dt)) * grid.length,
        dx=grid.dx,
        dt=p1.dt,
    )


# -- reduction -----------------------------------------------------------------------

@dataclass
class ReductionReport:
    times: np.ndarray
    gap: np.ndarray
    variance: np.ndarray
    indicator_max: float
    eps: float
    n_paths: int
    n_aborted: int
    gap_by_eps: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.indicator_max == 0.0 and bool(np.all(self.gap >= self.variance - 1e-12))


def _u_snapshots(trajs, problems):
    return trajs[0].u


def _gap_from_ensemble(snaps: np.ndarray, xi: XiGrid, dx: float) -> tuple[np.ndarray, np.ndarray, float]:
    """``int int E f (1 - E f) dxi dx`` and ``int int Var f`` per snapshot; also max per-path f(1-f)."""
    c = xi.centers
    gaps, variances = [], []
    ind_max = 0.0
    for t in range(snaps.shape[1]):
        vals = snaps[:, t, :]  # paths x cells
        f = (vals[:, :, None] > c[None, None, :]).astype(np.int8)
        ind_max = max(ind_max, float(np.max(f * (1 - f))))
        p = f.mean(axis=0)
        var = (f.astype(float) ** 2).mean(axis=0) - p * p
        gaps.append(float(np.sum(p * (1 - p)) * dx * xi.width))
        variances.append(float(np.sum(var) * dx * xi.width))
    return np.array(gaps), np.array(variances), ind_max


def reduction_experiment(shared: Shared, data: Data, n_paths: int, master_seed: int = 0, workers: int = 1,
                         eps_list: Sequence[float] | None = None) -> ReductionReport:
    """Ensemble spread of ``1_{u > xi}``; zero for a deterministic ensemble.

    For a single path the kinetic function is an exact indicator, so the gap
    only measures cross-path spread at fixed ``(t, x, xi)``.
    """
    if n_paths < 2:
        raise ValueError("reduction experiment needs n_paths >= 2")
    eps_all = sorted({shared.cfg.eps, *(eps_list or [])}, reverse=True)
    dt = shared_dt(shared, [data], eps_all)
    by_eps = {}
    main = None
    for eps in eps_all:
        prob = _prepare(shared, data, dt, eps)
        ok, aborted = run_ensemble([prob], _u_snapshots, n_paths, master_seed, workers)
        snaps = np.stack(ok)
        gap, var, ind = _gap_from_ensemble(snaps, prob.xi, shared.grid.dx)
        by_eps[float(eps)] = float(gap[-1])
        if eps == shared.cfg.eps:
            main = ReductionReport(prob.times, gap, var, ind, float(eps), n_paths, aborted)
    main.gap_by_eps = by_eps
    return main


# -- viscosity sweep ------------------------------------------------------------------

@dataclass
class SweepReport:
    eps_list: np.ndarray
    cauchy_l1: np.ndarray
    cauchy_ci: np.ndarray
    energy_rows: list
    n_paths: int
    n_aborted: int
    dt: float

    @property
    def cauchy_nonincreasing(self) -> bool:
        d, c = self.cauchy_l1, self.cauchy_ci
        return all(d[k + 1] <= d[k] + c[k] + c[k + 1] for k in range(len(d) - 1))


def _sweep_summary(trajs, problems):
    dx = problems[0].grid.dx
    w = snapshot_weights(problems[0].times)
    diffs = [float(np.sum(w[:, None] * np.abs(a.u - b.u)) * dx) for a, b in zip(trajs[:-1], trajs[1:])]
    energy = [[tr.sup_lp[2], tr.sup_lp[4], tr.dissipation[2][-1], tr.dissipation[2][-1] ** 2] for tr in trajs]
    return np.array(diffs), np.array(energy)


def viscosity_sweep(shared: Shared, data: Data, eps_list: Sequence[float], n_paths: int, master_seed: int = 0,
                    workers: int = 1) -> SweepReport:
    """Coupled runs over a decreasing viscosity list on one shared time grid."""
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    dt = shared_dt(shared, [data], eps_list)
    problems = [_prepare(shared, data, dt, eps) for eps in eps_list]
    ok, aborted = run_ensemble(problems, _sweep_summary, n_paths, master_seed, workers)
    if len(eps_list) > 1:
        cauchy, cci = mean_ci([o[0] for o in ok])
    else:
        cauchy = cci = np.zeros(0)
    emean, eci = mean_ci([o[1] for o in ok])
    rows = []
    for k, eps in enumerate(eps_list):
        rows.append({
            "eps": eps,
            "sup_l2": float(emean[k, 0]), "sup_l2_ci": float(eci[k, 0]),
            "sup_l4": float(emean[k, 1]), "sup_l4_ci": float(eci[k, 1]),
            "dissipation": float(emean[k, 2]), "dissipation_ci": float(eci[k, 2]),
            "dissipation_sq": float(emean[k, 3]), "dissipation_sq_ci": float(eci[k, 3]),
        })
    return SweepReport(np.array(eps_list), np.asarray(cauchy), np.asarray(cci), rows, n_paths, aborted, problems[0].dt)


def spearman_less(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Spearman rho and the one-sided p-value for a negative association.

    The null distribution is enumerated exactly for up to 9 points; beyond
    that the usual t approximation is used.
    """
    from scipy.stats import rankdata, spearmanr, t as student_t

    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    n = x.size
    rho = float(spearmanr(x, y).statistic)
    if n > 9:
        tt = rho * math.sqrt((n - 2) / max(1e-300, 1 - rho * rho))
        return rho, float(student_t.cdf(tt, n - 2))
    rx, ry = rankdata(x), rankdata(y)
    rx_c = rx - rx.mean()
    denom = math.sqrt(float(np.sum(rx_c**2) * np.sum((ry - ry.mean()) ** 2)))
    count = total = 0
    for perm in itertools.permutations(ry):
        r = float(np.dot(rx_c, np.asarray(perm) - ry.mean())) / denom
        count += r <= rho + 1e-12
        total += 1
    return rho, count / total


def energy_uniformity(report: SweepReport, key: str = "sup_l2", max_ratio: float = 2.0, alpha: float = 0.05) -> dict:
    """Spread of an energy estimate over the sweep and a one-sided Spearman test for growth as eps falls."""
    est = np.array([r[key] for r in report.energy_rows], dtype=float)
    ratio = float(est.max() / est.min()) if est.min() > 0 else float("inf")
    out = {"key": key, "estimates": est.tolist(), "ratio": ratio, "ratio_ok": ratio < max_ratio}
    if est.size >= 3:
        rho, pval = spearman_less(report.eps_list, est)
    else:
        rho, pval = float("nan"), 1.0
    out.update(spearman_rho=rho, spearman_p=pval, no_growth=not pval < alpha)
    return out


def viscous_error_order(shared: Shared, data: Data, eps_list: Sequence[float]) -> dict:
    """Zero-noise ``||u^eps(T) - u^0(T)||_L1`` per eps and the fitted log-log slope."""
    eps_list = [float(e) for e in eps_list]
    dt = shared_dt(shared, [data], eps_list)
    zero = replace(shared, cfg=replace(shared.cfg, K=0), noise=zero_noise())
    ref = _prepare(zero, data, dt, 0.0)
    path = sample_path(0, ref.n_steps, ref.dt, 0)
    u_ref = run_problem(ref, path).u[-1]
    errs = []
    for eps in eps_list:
        u = run_problem(_prepare(zero, data, dt, eps), path).u[-1]
        errs.append(float(shared.grid.dx * np.sum(np.abs(u - u_ref))))
    order = float(np.polyfit(np.log(eps_list), np.log(errs), 1)[0]) if len(eps_list) > 1 else float("nan")
    return {"eps": eps_list, "errors": errs, "order": order, "dt": ref.dt}


# -- kinetic diagnostics ----------------------------------------------------------------

def _kinetic_summary(trajs, problems):
    tr = trajs[0]
    h = tr.defect_hist
    return {"mass": h.mass, "lo": h.overflow_lo, "hi": h.overflow_hi, "u": tr.u}


@dataclass
class KineticReport:
    xi: np.ndarray
    mu_m: np.ndarray
    mu_nu: np.ndarray
    mu_m_slope: np.ndarray
    mu_nu_slope: np.ndarray
    N0: float
    overflow_by_R: dict
    total_mass: float
    tail_report: dict
    moment_check: dict
    sides: dict
    n_paths: int
    n_aborted: int
    times: np.ndarray
    N: float

    @property
    def mu_monotone(self) -> bool:
        return bool(np.all(np.diff(self.mu_m) <= 0.0) and np.all(np.diff(self.mu_nu) <= 0.0))


def kinetic_experiment(shared: Shared, data: Data, n_paths: int, master_seed: int = 0, workers: int = 1,
                       layer_widths: Sequence[float] | None = None, moment_p: float = 2.0) -> KineticReport:
    """Tail functions, dissipation tails and per-side boundary traces/defects/BLN values."""
    dt = shared_dt(shared, [data])
    prob = _prepare(shared, data, dt)
    ok, aborted = run_ensemble([prob], _kinetic_summary, n_paths, master_seed, workers)
    if not ok:
        raise RuntimeError("every path aborted")
    xi = prob.xi
    hists = [KineticHistogram(xi, o["mass"], o["lo"], o["hi"]) for o in ok]
    grid = shared.grid
    edges = xi.edges
    m_vals = np.asarray(mu_m(hists, edges))
    nu_vals = tree_sum([occupation_tail(o["u"], prob.times, grid.dx, edges) for o in ok]) / len(ok)
    # data bound; the default xi level is 4 max(N0, 1)
    N0 = data_sup(data.u0, data.b) or 1.0
    merged = tree_sum(hists)
    over = {float(R): merged.mass_outside(R) / len(ok) for R in (N0, 2 * N0, 4 * N0)}
    total = merged.total / len(ok)

    # Chebyshev: sup_xi |xi|^p mu_nu(xi) <= E int |u|^p
    w = snapshot_weights(prob.times)
    moment = tree_sum([float(np.sum(w[:, None] * np.abs(o["u"]) ** moment_p) * grid.dx) for o in ok]) / len(ok)
    pos = edges > 0
    cheb = float(np.max(edges[pos] ** moment_p * nu_vals[pos])) if np.any(pos) else 0.0

    widths = list(layer_widths) if layer_widths else [4.0 * grid.dx]
    sides = {}
    for side in ("left", "right"):
        per_width = []
        for lw in widths:
            traces = [trace_from_values(o["u"], prob.times, grid, side, lw, xi) for o in ok]
            per_path_min = [float(np.min(defect_measure(t, data.b, shared.flux).m_bar_plus)) for t in traces]
            avg = average_traces(traces)
            dm = defect_measure(avg, data.b, shared.flux)
            per_width.append({
                "layer_width": float(lw),
                "trace": avg,
                "defect": dm,
                "bln": bln_values(avg, data.b, shared.flux),
                "bln_min": bln_check(avg, data.b, shared.flux),
                "m_plus_min": float(np.min(dm.m_bar_plus)),
                "m_plus_at_N": float(np.max(np.abs(dm.m_bar_plus[:, -1]))),
                "m_plus_min_per_path": float(min(per_path_min)),
            })
        sides[side] = per_width

    levels = [N0 * s for s in (1.0, 1.5, 2.0, 3.0)]
    return KineticReport(
        xi=edges.copy(), mu_m=m_vals, mu_nu=nu_vals,
        mu_m_slope=slopes(edges, m_vals), mu_nu_slope=slopes(edges, nu_vals),
        N0=N0, overflow_by_R=over, total_mass=total,
        tail_report={"mu_m": tail_decay_report(edges, m_vals, levels), "mu_nu": tail_decay_report(edges, nu_vals, levels, p=moment_p)},
        moment_check={"p": moment_p, "moment": moment, "chebyshev_sup": cheb, "holds": cheb <= moment + 1e-12},
        sides=sides, n_paths=n_paths, n_aborted=aborted, times=prob.times, N=xi.N,
    )
