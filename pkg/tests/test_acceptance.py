"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION <n> PASS|FAIL`` line with the measured
quantities and then asserts the same predicate. Tolerances are pinned below.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from skl.cli import run_cli
from skl.experiments import (
    contraction_experiment,
    energy_uniformity,
    kinetic_experiment,
    reduction_experiment,
    viscosity_sweep,
    viscous_error_order,
)
from skl.flux import burgers
from skl.grid import BoundaryData
from skl.kinetic import BoundaryTrace, XiGrid, defect_measure
from skl.scenarios import (
    boundary_pair,
    interior_pair,
    smooth_data,
    smooth_shared,
    standard_data,
    standard_shared,
)
from skl.validation import boundary_layer, riemann_rarefaction, riemann_shock

SHOCK_TOL_DX = 2.0
IDENTICAL_TOL = 1e-12
MARGIN_CONST = 10.0
ENERGY_MAX_RATIO = 2.0
SPEARMAN_ALPHA = 0.05
OVERFLOW_FRACTION = 1e-3
DEFECT_TOL = {200: 1e-2, 400: 5e-3}
BLN_TOL = 1e-2
DEFECT_BAND_MIN = 0.1
VISCOUS_ORDER_MIN = 0.8

N_PATHS_CONTRACTION = 200
N_PATHS_SWEEP = 100
N_PATHS_ENERGY = 200
N_PATHS_KINETIC = 100


@pytest.fixture
def report(request):
    tr = request.config.pluginmanager.getplugin("terminalreporter")

    def emit(number: int, passed: bool, detail: str) -> None:
        line = f"CRITERION {number} {'PASS' if passed else 'FAIL'}: {detail}"
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        else:
            print(line)

    return emit


def _fmt(xs) -> str:
    return "[" + ", ".join(f"{x:.4g}" for x in xs) + "]"


# -- 1 -----------------------------------------------------------------------------------------

def test_criterion_1_deterministic_oracles(report):
    shock = riemann_shock(200)
    rare = riemann_rarefaction((100, 200, 400))
    shock_ok = shock["error"] <= SHOCK_TOL_DX * shock["dx"]
    ok = shock_ok and rare["passed"]
    report(1, ok, f"shock front {shock['front']:.5f} vs 0.25 (err {shock['error']:.2e}, tol {2 * shock['dx']:.2e}); "
                  f"rarefaction C = {rare['C']:.4f}, error/bound at n = 100, 200, 400: {_fmt(rare['ratio_to_bound'])}")
    assert shock_ok
    assert rare["passed"], "rarefaction L1 error exceeds C dx log(1/dx) with C fitted at n_cells = 100"


# -- 2 -----------------------------------------------------------------------------------------

def test_criterion_2_coupled_identical(report):
    shared = standard_shared()
    d = standard_data(shared)
    r = contraction_experiment(shared, d, d, n_paths=20)
    worst = float(np.max(np.abs(r.lhs)))
    ok = worst <= IDENTICAL_TOL
    report(2, ok, f"max_t lhs = {worst:.3e} over 20 paths (tol {IDENTICAL_TOL:g})")
    assert ok


# -- 3 -----------------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_3_contraction_matrix(report):
    rows = []
    holds = shrinks = True
    for label, pair in (("interior", interior_pair), ("boundary", boundary_pair)):
        excess = {}
        for n_cells, n_paths in ((200, N_PATHS_CONTRACTION), (400, 2 * N_PATHS_CONTRACTION)):
            shared = standard_shared(n_cells=n_cells)
            d1, d2 = pair(shared)
            r = contraction_experiment(shared, d1, d2, n_paths, margin_const=MARGIN_CONST)
            holds &= r.passed
            excess[n_cells] = r.excess
            rows.append(f"{label} n={n_cells}: holds={r.passed} excess={r.excess:.2e} margin={r.margin:.3f}")
        shrinks &= excess[400] <= excess[200]
    report(3, holds and shrinks, "; ".join(rows))
    assert holds, "contraction predicate violated at some snapshot"
    assert shrinks, "excess over bound + CI does not shrink when (n_cells, n_paths) doubles"


# -- 4 -----------------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_4_energy_uniformity(report):
    shared = standard_shared()
    eps_list = [2.0**-k for k in range(2, 9)]
    r = viscosity_sweep(shared, standard_data(shared), eps_list, N_PATHS_ENERGY)
    e = energy_uniformity(r, max_ratio=ENERGY_MAX_RATIO, alpha=SPEARMAN_ALPHA)
    ok = e["ratio_ok"] and e["no_growth"]
    report(4, ok, f"E sup ||v||_2^2 = {_fmt(e['estimates'])}; ratio {e['ratio']:.3f} (< {ENERGY_MAX_RATIO}); "
                  f"Spearman rho {e['spearman_rho']:.3f}, one-sided p {e['spearman_p']:.2e} (alpha {SPEARMAN_ALPHA})")
    assert e["ratio_ok"]
    assert e["no_growth"], "energy estimate grows as eps decreases"


# -- 5 and 6 -----------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def kinetic_200():
    shared = standard_shared(n_cells=200, n_bins=256)
    return kinetic_experiment(shared, standard_data(shared), N_PATHS_KINETIC)


@pytest.mark.slow
def test_criterion_5_kinetic_tail(report, kinetic_200):
    r = kinetic_200
    Rs = sorted(r.overflow_by_R)
    over = [r.overflow_by_R[R] for R in Rs]
    monotone = all(b <= a for a, b in zip(over, over[1:]))
    small = over[-1] < OVERFLOW_FRACTION * r.total_mass
    ok = monotone and small and r.mu_monotone
    report(5, ok, f"N0 = {r.N0:.4f}; overflow at R = N0, 2N0, 4N0: {_fmt(over)}; total {r.total_mass:.4g}; "
                  f"mu_m, mu_nu nonincreasing: {r.mu_monotone}")
    assert monotone and small and r.mu_monotone


def _constant_state_example() -> tuple[float, float]:
    xi = XiGrid(2.0, 256)
    f = (1.0 > xi.edges).astype(float)[None, :]
    dm = defect_measure(BoundaryTrace("right", 0.0, xi, np.zeros(1), f),
                        BoundaryData.constant(0.0, 1.0, [0.0, 1.0]), burgers(), N=2.0)
    i0 = int(np.flatnonzero(dm.xi == 0.0)[0])
    return float(dm.m_bar_plus[0, i0]), xi.width


@pytest.mark.slow
def test_criterion_6_defect_suite(report, kinetic_200):
    shared = standard_shared(n_cells=400, n_bins=512)
    runs = {200: kinetic_200, 400: kinetic_experiment(shared, standard_data(shared), N_PATHS_KINETIC)}
    ok = True
    parts = []
    for n, r in runs.items():
        at_N = max(r.sides[s][0]["m_plus_at_N"] for s in ("left", "right"))
        m_min = min(r.sides[s][0]["m_plus_min"] for s in ("left", "right"))
        ok &= at_N == 0.0 and m_min >= -DEFECT_TOL[n]
        parts.append(f"n={n}: |m+(N)| = {at_N:g}, min m+ = {m_min:.2e} (tol {DEFECT_TOL[n]:g})")
    value, width = _constant_state_example()
    ok &= abs(value - 2.5) <= width
    parts.append(f"constant state m+(0) = {value:.5f} vs 2.5 (bin width {width:.4f})")
    report(6, ok, "; ".join(parts))
    assert ok


# -- 7 -----------------------------------------------------------------------------------------

def test_criterion_7_boundary_layer(report):
    r = boundary_layer(n_cells=200)
    c = r["checks"]
    ok = c["interior_within_dx"] and r["bln_min"] >= -BLN_TOL and r["m_plus_min_on_0_0.5"] > DEFECT_BAND_MIN
    report(7, ok, f"interior deviation {r['interior_deviation']:.2e} (dx {r['dx']:.3g}); bln min {r['bln_min']:.3e}; "
                  f"min m+ on [0, 0.5] = {r['m_plus_min_on_0_0.5']:.4f}")
    assert ok


# -- 8 -----------------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_8_viscosity_sweep(report):
    shared = standard_shared()
    r = viscosity_sweep(shared, standard_data(shared), [0.2, 0.1, 0.05, 0.025], N_PATHS_SWEEP)
    sm = smooth_shared()
    order = viscous_error_order(sm, smooth_data(sm), [0.02, 0.01, 0.005, 0.0025])
    ok = r.cauchy_nonincreasing and order["order"] >= VISCOUS_ORDER_MIN
    report(8, ok, f"Cauchy L1 differences {_fmt(r.cauchy_l1)} (CI {_fmt(r.cauchy_ci)}); "
                  f"smooth zero-noise errors {_fmt(order['errors'])}, order {order['order']:.3f}")
    assert ok


# -- 9 -----------------------------------------------------------------------------------------

def test_criterion_9_reduction(report):
    shared = standard_shared()
    noisy = reduction_experiment(shared, standard_data(shared), n_paths=20)
    quiet_shared = standard_shared(K=0, sigma=0.0)
    quiet = reduction_experiment(quiet_shared, standard_data(quiet_shared), n_paths=5)
    gap0 = float(np.max(quiet.gap))
    ok = noisy.indicator_max == 0.0 and gap0 == 0.0
    report(9, ok, f"max per-path f(1-f) = {noisy.indicator_max:g}; zero-noise gap = {gap0:g}; "
                  f"noisy final gap {noisy.gap[-1]:.3e}")
    assert ok


# -- 10 ----------------------------------------------------------------------------------------

_REPRO = """
experiment = "{exp}"
master_seed = 2024
n_paths = {n_paths}

[grid]
n_cells = 60

[solver]
t_end = 0.2
eps = 0.05
n_bins = 64

{extra}

[data1]
u0 = [{{name = "linear", left = 0.5, right = -0.25}}, {{name = "sine", amp = 0.3, mode = 2}}]
left = 0.5
right = -0.25
{data2}
"""

_DATA2 = """
[data2]
u0 = [{name = "linear", left = 0.5, right = -0.25}, {name = "sine", amp = 0.3, mode = 2}, {name = "bump", amp = 0.3, center = 0.5, width = 0.2}]
left = 0.5
right = -0.25
"""


def test_criterion_10_reproducibility(report, tmp_path):
    cases = {
        "solve": ("", ""),
        "contraction": ("", _DATA2),
        "reduction": ("", ""),
        "sweep": ("[sweep]\neps_list = [0.2, 0.1, 0.05]", ""),
        "kinetic": ("", ""),
    }
    bad = []
    n_files = 0
    for exp, (extra, data2) in cases.items():
        text = _REPRO.format(exp=exp, n_paths=1 if exp == "solve" else 8, extra=extra, data2=data2)
        if exp != "contraction":
            text = text.replace("[data1]", "[data]")
        cfg = tmp_path / f"{exp}.toml"
        cfg.write_text(text)
        dirs = [tmp_path / f"{exp}_w{w}" for w in (1, 3)]
        for w, d in zip((1, 3), dirs):
            assert run_cli([exp, "--config", str(cfg), "--workers", str(w), "--out", str(d)]) in (0, 1)
        names = sorted(p.name for p in dirs[0].iterdir())
        assert names == sorted(p.name for p in dirs[1].iterdir())
        for name in names:
            n_files += 1
            if (dirs[0] / name).read_bytes() != (dirs[1] / name).read_bytes():
                bad.append(name)
    ok = not bad
    report(10, ok, f"{n_files} artifacts compared across workers = 1 and 3; differing: {bad or 'none'}")
    assert ok
