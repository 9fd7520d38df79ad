"""Monte Carlo finite-volume solver and kinetic diagnostics for scalar
stochastic conservation laws with Dirichlet boundary data."""
from ._backend import BACKEND, compiled_available
from .flux import FluxModel, Scheme, burgers, cubic, linear, max_speed, numerical_flux
from .grid import BoundaryData, Field, Grid, l1_norm, make_grid
from .noise import NoiseModel, WienerPath, sample_path
from .solver import SolverConfig, Trajectory, run

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundaryData",
    "Field",
    "FluxModel",
    "Grid",
    "NoiseModel",
    "Scheme",
    "SolverConfig",
    "Trajectory",
    "WienerPath",
    "burgers",
    "compiled_available",
    "cubic",
    "l1_norm",
    "linear",
    "make_grid",
    "max_speed",
    "numerical_flux",
    "run",
    "sample_path",
]
