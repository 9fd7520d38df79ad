from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skl.grid import make_grid
from skl.profiles import boundary_profile, initial_profile


def test_riemann_splits_cell():
    g = make_grid(0, 1, 4)
    u = initial_profile(g, {"name": "riemann", "ul": 1.0, "ur": 0.0, "x0": 0.375}).values
    np.testing.assert_allclose(u, [1.0, 0.5, 0.0, 0.0])


@given(st.integers(1, 5), st.integers(4, 64))
def test_sine_cell_averages_integrate_exactly(mode, n):
    g = make_grid(0, 2, n)
    u = initial_profile(g, {"name": "sine", "amp": 1.0, "mode": mode}).values
    exact = (1 - math.cos(mode * math.pi)) / (mode * math.pi / 2.0)
    assert g.dx * u.sum() == pytest.approx(exact, abs=1e-12)


def test_sum_of_specs_and_linear_endpoints():
    g = make_grid(0, 1, 10)
    u = initial_profile(g, [{"name": "linear", "left": 0.5, "right": -0.25}, {"name": "constant", "value": 1.0}]).values
    assert u[0] == pytest.approx(1.5 - 0.75 * 0.05) and np.all(np.diff(u) < 0)


def test_bump_is_compact():
    g = make_grid(0, 1, 100)
    u = initial_profile(g, {"name": "bump", "amp": 0.3, "center": 0.5, "width": 0.2}).values
    assert np.all(u[g.cell_centers < 0.29] == 0) and np.all(u[g.cell_centers > 0.71] == 0)
    assert 0 < u.max() <= 0.3


def test_boundary_profiles():
    b = boundary_profile({"left": {"name": "ramp", "value": 2.0, "tau": 0.5},
                          "right": {"name": "step", "t0": 0.5, "before": 1.0, "after": -1.0}}, 1.0, n_samples=5)
    np.testing.assert_allclose(b.left, [0.0, 1.0, 2.0, 2.0, 2.0])
    np.testing.assert_allclose(b.right, [1.0, 1.0, -1.0, -1.0, -1.0])


def test_unknown_names():
    g = make_grid(0, 1, 4)
    with pytest.raises(ValueError):
        initial_profile(g, {"name": "sawtooth"})
    with pytest.raises(ValueError):
        boundary_profile({"left": {"name": "pulse"}}, 1.0)
