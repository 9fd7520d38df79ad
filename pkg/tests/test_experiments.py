from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skl.experiments import (
    Data,
    Shared,
    SweepReport,
    _u_snapshots,
    _prepare,
    contraction_experiment,
    energy_uniformity,
    kinetic_experiment,
    mean_ci,
    reduction_experiment,
    run_ensemble,
    shared_dt,
    spearman_less,
    tree_sum,
    viscosity_sweep,
)
from skl.flux import linear
from skl.kinetic import snapshot_weights
from skl.noise import zero_noise
from skl.profiles import boundary_profile, initial_profile
from skl.scenarios import boundary_pair, interior_pair, standard_data, standard_shared
from skl.solver import data_sup


def _small(**kw):
    kw.setdefault("n_cells", 40)
    kw.setdefault("t_end", 0.1)
    kw.setdefault("eps", 0.05)
    return standard_shared(**kw)


# -- reductions --------------------------------------------------------------------------

def test_tree_sum_topology():
    assert tree_sum([1, 2, 3, 4, 5]) == 15
    # ((a + b) + (c + d)) + e
    assert tree_sum(["a", "b", "c", "d", "e"]) == "abcde"
    with pytest.raises(ValueError):
        tree_sum([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_tree_sum_accuracy(xs):
    assert tree_sum(xs) == pytest.approx(math.fsum(xs), abs=1e-6 * len(xs))


def test_mean_ci():
    m, c = mean_ci([np.array([1.0, 2.0])])
    assert np.all(c == 0) and np.all(m == [1, 2])
    m, c = mean_ci([0.0, 2.0])
    assert m == 1.0 and c == pytest.approx(1.959963984540054 * math.sqrt(2 / 2))


def test_ensemble_independent_of_workers():
    shared = _small()
    data = standard_data(shared)
    prob = _prepare(shared, data, shared_dt(shared, [data]))
    one, _ = run_ensemble([prob], _u_snapshots, 4, master_seed=3, workers=1)
    two, _ = run_ensemble([prob], _u_snapshots, 4, master_seed=3, workers=2)
    assert all(np.array_equal(a, b) for a, b in zip(one, two))
    other, _ = run_ensemble([prob], _u_snapshots, 1, master_seed=4)
    assert not np.array_equal(one[0], other[0])


# -- contraction -----------------------------------------------------------------------------

def test_contraction_identical_data_is_exact():
    shared = _small()
    d = standard_data(shared)
    r = contraction_experiment(shared, d, d, n_paths=5)
    assert np.max(r.lhs) == 0.0 and r.passed


def test_contraction_needs_two_paths():
    shared = _small()
    d = standard_data(shared)
    with pytest.raises(ValueError):
        contraction_experiment(shared, d, d, n_paths=1)


def test_contraction_zero_noise_interior():
    shared = _small(K=0, sigma=0.0, t_end=0.05, n_cells=100, eps=0.01)
    d1, d2 = interior_pair(shared)
    r = contraction_experiment(shared, d1, d2, n_paths=2)
    assert np.all(r.lhs <= r.rhs_init * (1 + 1e-12))
    assert np.all(np.diff(r.lhs) <= 1e-14)


def test_contraction_zero_noise_boundary_shift():
    shared = _small(K=0, sigma=0.0, t_end=0.1, n_cells=100, eps=0.01)
    d1, d2 = boundary_pair(shared)
    r = contraction_experiment(shared, d1, d2, n_paths=2)
    assert r.rhs_init == 0.0
    np.testing.assert_allclose(r.rhs_boundary, r.M_b * 0.25 * r.times, rtol=1e-12, atol=1e-15)
    assert r.passed


# -- reduction -----------------------------------------------------------------------------

def test_reduction_indicator_and_spread():
    shared = _small()
    r = reduction_experiment(shared, standard_data(shared), n_paths=6)
    assert r.indicator_max == 0.0
    assert np.all(r.gap >= r.variance - 1e-12) and np.all(r.gap >= 0)
    assert r.gap[0] == 0.0 and r.gap[-1] > 0.0


def test_reduction_zero_noise_gap():
    shared = _small(K=0, sigma=0.0)
    r = reduction_experiment(shared, standard_data(shared), n_paths=3, eps_list=[0.1])
    assert np.all(r.gap == 0.0) and set(r.gap_by_eps) == {0.1, 0.05}


def test_reduction_needs_two_paths():
    shared = _small()
    with pytest.raises(ValueError):
        reduction_experiment(shared, standard_data(shared), n_paths=1)


# -- sweep --------------------------------------------------------------------------------------

def test_sweep_single_eps():
    shared = _small()
    r = viscosity_sweep(shared, standard_data(shared), [0.05], n_paths=2)
    assert r.cauchy_l1.size == 0 and r.cauchy_nonincreasing and len(r.energy_rows) == 1


def test_sweep_rejects_unsorted():
    shared = _small()
    with pytest.raises(ValueError):
        viscosity_sweep(shared, standard_data(shared), [0.05, 0.1], n_paths=2)


def _discrete_heat(u0, eps, dt, dx, n_steps, rec):
    n = u0.size
    L = -2 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
    M = np.eye(n) + eps * dt / dx**2 * L
    out, u = [], u0.copy()
    for s in range(n_steps + 1):
        if s in rec:
            out.append(u.copy())
        u = M @ u
    return np.array(out)


def test_sweep_pure_heat_matches_reference():
    base = _small(K=0, sigma=0.0, n_cells=30, record_every=5)
    shared = Shared(base.grid, base.cfg, linear(0.0), zero_noise())
    data = Data(initial_profile(shared.grid, {"name": "sine", "amp": 1.0, "mode": 1}),
                boundary_profile({"left": 0.0, "right": 0.0}, shared.cfg.t_end))
    eps_list = [0.2, 0.1, 0.05]
    r = viscosity_sweep(shared, data, eps_list, n_paths=2)
    prob = _prepare(shared, data, r.dt)
    w = snapshot_weights(prob.times)
    refs = [_discrete_heat(data.u0.values, e, r.dt, shared.grid.dx, prob.n_steps, set(prob.rec_steps.tolist()))
            for e in eps_list]
    expected = [np.sum(w[:, None] * np.abs(a - b)) * shared.grid.dx for a, b in zip(refs, refs[1:])]
    np.testing.assert_allclose(r.cauchy_l1, expected, rtol=1e-10)
    assert np.all(r.cauchy_ci == 0.0)


# -- energy trend test ------------------------------------------------------------------------

def test_spearman_exact_null():
    rho, p = spearman_less([1, 2, 3, 4, 5, 6, 7], [7, 6, 5, 4, 3, 2, 1])
    assert rho == pytest.approx(-1.0) and p == pytest.approx(1 / 5040)
    rho, p = spearman_less([1, 2, 3], [1, 2, 3])
    assert p == 1.0
    rho, p = spearman_less(np.arange(12), -np.arange(12.0))
    assert p < 1e-6


def _fake_sweep(values):
    eps = np.array([2.0**-k for k in range(2, 2 + len(values))])
    rows = [{"eps": e, "sup_l2": v} for e, v in zip(eps, values)]
    return SweepReport(eps, np.zeros(len(eps) - 1), np.zeros(len(eps) - 1), rows, 1, 0, 1e-3)


def test_energy_uniformity_flags_growth():
    grow = energy_uniformity(_fake_sweep([1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6]))
    assert grow["ratio_ok"] and not grow["no_growth"]
    flat = energy_uniformity(_fake_sweep([1.0, 1.2, 0.9, 1.1, 1.05, 0.95, 1.0]))
    assert flat["ratio_ok"] and flat["no_growth"]
    assert not energy_uniformity(_fake_sweep([1.0, 3.0, 1.0]))["ratio_ok"]


# -- kinetic ----------------------------------------------------------------------------------

def test_kinetic_small_run():
    shared = _small(n_bins=64)
    data = standard_data(shared)
    r = kinetic_experiment(shared, data, n_paths=3)
    assert r.mu_monotone
    N0 = data_sup(data.u0, data.b)
    assert r.N0 == N0 and sorted(r.overflow_by_R) == [N0, 2 * N0, 4 * N0]
    for side in ("left", "right"):
        assert r.sides[side][0]["m_plus_at_N"] == 0.0
    assert r.moment_check["holds"]
