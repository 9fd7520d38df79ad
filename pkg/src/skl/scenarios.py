"""Built-in scenarios used by the acceptance tests and the CLI defaults."""
from __future__ import annotations

from .experiments import Data, Shared
from .flux import flux_from_spec
from .grid import make_grid
from .noise import noise_from_spec
from .profiles import boundary_profile, initial_profile
from .solver import SolverConfig

STANDARD_B = {"left": 0.5, "right": -0.25}
# matches the boundary values at t = 0
STANDARD_U0 = [{"name": "linear", "left": 0.5, "right": -0.25}, {"name": "sine", "amp": 0.3, "mode": 2}]
BUMP = {"name": "bump", "amp": 0.3, "center": 0.5, "width": 0.2}
BOUNDARY_SHIFT = 0.25

# smooth zero-boundary data; Burgers steepens at t = 1/(0.5 pi) ~ 0.64
SMOOTH_U0 = {"name": "sine", "amp": 0.5, "mode": 1}
SMOOTH_T = 0.3


def standard_shared(n_cells: int = 200, eps: float = 0.02, t_end: float = 0.5, flux: str = "burgers",
                    noise: str = "linear_multiplicative", sigma: float = 0.25, K: int = 8,
                    scheme: str = "godunov", record_every: int = 10, **cfg_kw) -> Shared:
    """Burgers with linear multiplicative noise on (0, 1)."""
    grid = make_grid(0.0, 1.0, n_cells)
    cfg = SolverConfig(eps=eps, t_end=t_end, K=K, scheme=scheme, record_every=record_every, **cfg_kw)
    return Shared(grid, cfg, flux_from_spec(flux), noise_from_spec(noise, sigma, K))


def standard_data(shared: Shared) -> Data:
    t_end = shared.cfg.t_end
    return Data(initial_profile(shared.grid, STANDARD_U0), boundary_profile(STANDARD_B, t_end))


def interior_pair(shared: Shared) -> tuple[Data, Data]:
    """Same boundary data; initial data differ by a compact bump."""
    d1 = standard_data(shared)
    u2 = initial_profile(shared.grid, [*STANDARD_U0, BUMP])
    return d1, Data(u2, d1.b)


def boundary_pair(shared: Shared, delta: float = BOUNDARY_SHIFT) -> tuple[Data, Data]:
    """Same initial data; the left boundary value is shifted by ``delta``."""
    d1 = standard_data(shared)
    b2 = boundary_profile({"left": STANDARD_B["left"] + delta, "right": STANDARD_B["right"]}, shared.cfg.t_end)
    return d1, Data(d1.u0, b2)


def smooth_shared(n_cells: int = 400, t_end: float = SMOOTH_T, **kw) -> Shared:
    kw.setdefault("K", 0)
    kw.setdefault("sigma", 0.0)
    return standard_shared(n_cells=n_cells, t_end=t_end, **kw)


def smooth_data(shared: Shared) -> Data:
    return Data(initial_profile(shared.grid, SMOOTH_U0), boundary_profile({"left": 0.0, "right": 0.0}, shared.cfg.t_end))


__all__ = [
    "STANDARD_U0", "STANDARD_B", "standard_shared", "standard_data", "interior_pair", "boundary_pair",
    "smooth_shared", "smooth_data",
]
