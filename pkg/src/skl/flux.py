"""Flux laws, speed caps and monotone two-point numerical fluxes."""
from __future__ import annotations

import enum
from functools import partial
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import BoundaryData

_DENSE_SAMPLES = 100_001


class Scheme(enum.IntEnum):
    GODUNOV = 0
    ENGQUIST_OSHER = 1
    LAX_FRIEDRICHS = 2

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, Scheme):
            return value
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            return cls(int(value))
        if isinstance(value, str):
            key = value.strip().lower().replace("-", "_").replace(" ", "_")
            aliases = {
                "godunov": cls.GODUNOV,
                "engquist_osher": cls.ENGQUIST_OSHER,
                "engquistosher": cls.ENGQUIST_OSHER,
                "eo": cls.ENGQUIST_OSHER,
                "lax_friedrichs": cls.LAX_FRIEDRICHS,
                "laxfriedrichs": cls.LAX_FRIEDRICHS,
                "lf": cls.LAX_FRIEDRICHS,
            }
            if key in aliases:
                return aliases[key]
        raise ValueError(f"unknown flux scheme {value!r}")


@dataclass(frozen=True)
class FluxModel:
    """Scalar flux ``A`` with derivative ``a = A'``.

    Parameters
    ----------
    critical_points:
        Every zero of ``a``. Between consecutive critical points ``A`` is
        monotone, which is what the generic Godunov and Engquist-Osher
        fluxes rely on.
    speed_shape:
        ``"monotone"`` if ``a`` is monotone (so ``max |a|`` on ``[-N, N]``
        sits at an endpoint), ``"even"`` if ``|a|`` is even and
        nondecreasing in ``|xi|``, otherwise ``"none"`` (dense sampling).
    a_prime_bound:
        Declared bound on ``|A''|`` when the model satisfies the bounded
        second derivative hypothesis, else ``None``.
    kernel_code:
        Closed-form identifier understood by the compiled kernel; -1 for
        user-supplied callables.
    """

    name: str
    A: Callable
    a: Callable
    a_prime: Optional[Callable] = None
    convex: bool = False
    critical_points: tuple = ()
    speed_shape: str = "none"
    a_prime_bound: Optional[float] = None
    kernel_code: int = -1
    param: float = 0.0
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.speed_shape not in ("monotone", "even", "none"):
            raise ValueError(f"unknown speed_shape {self.speed_shape!r}")
        object.__setattr__(self, "critical_points", tuple(sorted(float(c) for c in self.critical_points)))


def _burgers_A(u):
    return 0.5 * u * u


def _burgers_a(u):
    return u


def _burgers_a_prime(u):
    return 1.0 + 0.0 * u


def _linear_A(c, u):
    return c * u


def _linear_a(c, u):
    return c + 0.0 * u


def _linear_a_prime(c, u):
    return 0.0 * u


def _cubic_A(u):
    return u * u * u / 3.0


def _cubic_a(u):
    return u * u


def _cubic_a_prime(u):
    return 2.0 * u


def burgers() -> FluxModel:
    return FluxModel(
        name="burgers",
        A=_burgers_A,
        a=_burgers_a,
        a_prime=_burgers_a_prime,
        convex=True,
        critical_points=(0.0,),
        speed_shape="monotone",
        a_prime_bound=1.0,
        kernel_code=0,
    )


def linear(c: float = 1.0) -> FluxModel:
    c = float(c)
    return FluxModel(
        name="linear",
        A=partial(_linear_A, c),
        a=partial(_linear_a, c),
        a_prime=partial(_linear_a_prime, c),
        convex=True,
        critical_points=(),
        speed_shape="monotone",
        a_prime_bound=0.0,
        kernel_code=1,
        param=c,
        params={"c": c},
    )


def cubic() -> FluxModel:
    # A'' = 2 xi is unbounded: polynomial growth only.
    return FluxModel(
        name="cubic",
        A=_cubic_A,
        a=_cubic_a,
        a_prime=_cubic_a_prime,
        convex=False,
        critical_points=(0.0,),
        speed_shape="even",
        a_prime_bound=None,
        kernel_code=2,
    )


_BUILTIN = {"burgers": burgers, "linear": linear, "cubic": cubic}


def flux_from_spec(name: str, **params) -> FluxModel:
    try:
        factory = _BUILTIN[name]
    except KeyError:
        raise ValueError(f"unknown flux {name!r}; choose from {sorted(_BUILTIN)}") from None
    return factory(**params)


def check_consistency(model: FluxModel, N: float = 4.0, h: float = 1e-3, n: int = 201) -> float:
    """Largest central-difference residual ``|(A(x+h)-A(x-h))/2h - a(x)|`` on ``[-N, N]``."""
    xi = np.linspace(-N, N, n)
    fd = (model.A(xi + h) - model.A(xi - h)) / (2 * h)
    return float(np.max(np.abs(fd - model.a(xi))))


def check_second_derivative_bound(model: FluxModel, N: float = 10.0, n: int = 2001) -> bool:
    if model.a_prime_bound is None or model.a_prime is None:
        return False
    xi = np.linspace(-N, N, n)
    return bool(np.all(np.abs(model.a_prime(xi)) <= model.a_prime_bound + 1e-12))


@dataclass(frozen=True)
class SpeedCap:
    N: float
    M_N: float
    M_b: float = 0.0


def max_speed(model: FluxModel, N: float) -> float:
    """``max |a(xi)|`` over ``[-N, N]``."""
    if not N > 0:
        raise ValueError(f"N must be positive, got {N}")
    N = float(N)
    if model.speed_shape == "monotone":
        vals = np.array([model.a(-N), model.a(N)], dtype=float)
    elif model.speed_shape == "even":
        vals = np.array([model.a(N)], dtype=float)
    else:
        vals = np.asarray(model.a(np.linspace(-N, N, _DENSE_SAMPLES)), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"flux speed is not finite on [-{N}, {N}]")
    return float(np.max(np.abs(vals)))


def speed_cap(model: FluxModel, N: float, b1: BoundaryData | None = None, b2: BoundaryData | None = None) -> SpeedCap:
    M_b = boundary_speed_cap(model, b1, b2) if b1 is not None else 0.0
    return SpeedCap(N=float(N), M_N=max_speed(model, N), M_b=M_b)


def boundary_speed_cap(model: FluxModel, b1: BoundaryData, b2: BoundaryData | None = None) -> float:
    """Largest speed over the combined range of two boundary data sets."""
    level = b1.sup_norm if b2 is None else max(b1.sup_norm, b2.sup_norm)
    if level == 0.0:
        return float(abs(model.a(0.0)))
    return max_speed(model, level)


# -- generic (callable) fluxes -------------------------------------------------

def _breakpoints(model: FluxModel, lo: float, hi: float) -> list[float]:
    return [lo] + [c for c in model.critical_points if lo < c < hi] + [hi]


def _positive_variation(model: FluxModel, lo: float, hi: float) -> tuple[float, float]:
    """``(int_lo^hi a^+, int_lo^hi a^-)`` for ``lo <= hi`` using monotone pieces of A."""
    pts = _breakpoints(model, lo, hi)
    vals = [float(model.A(p)) for p in pts]
    up = down = 0.0
    for v0, v1 in zip(vals[:-1], vals[1:]):
        d = v1 - v0
        if d > 0:
            up += d
        else:
            down += d
    return up, down


def _eo_split(model: FluxModel, u: float) -> tuple[float, float]:
    if u >= 0:
        return _positive_variation(model, 0.0, u)
    up, down = _positive_variation(model, u, 0.0)
    return -up, -down


def _generic_flux(model: FluxModel, ul: float, ur: float, scheme: Scheme, alpha: float) -> float:
    if scheme == Scheme.GODUNOV:
        if ul <= ur:
            return min(float(model.A(p)) for p in _breakpoints(model, ul, ur))
        return max(float(model.A(p)) for p in _breakpoints(model, ur, ul))
    if scheme == Scheme.ENGQUIST_OSHER:
        return float(model.A(0.0)) + _eo_split(model, ul)[0] + _eo_split(model, ur)[1]
    return 0.5 * (float(model.A(ul)) + float(model.A(ur))) - 0.5 * alpha * (ur - ul)


def numerical_flux(model: FluxModel, u_left: float, u_right: float, scheme="godunov", alpha: float | None = None) -> float:
    """Monotone two-point flux at a single face.

    ``alpha`` is the global speed bound required by Lax-Friedrichs.
    """
    scheme = Scheme.parse(scheme)
    if scheme == Scheme.LAX_FRIEDRICHS and alpha is None:
        raise ValueError("Lax-Friedrichs needs a global speed bound alpha")
    out = numerical_flux_array(model, np.array([u_left], float), np.array([u_right], float), scheme, alpha or 0.0)
    return float(out[0])


def numerical_flux_array(model: FluxModel, ul: np.ndarray, ur: np.ndarray, scheme, alpha: float = 0.0) -> np.ndarray:
    """Vectorized face fluxes; closed forms for the built-in laws."""
    scheme = Scheme.parse(scheme)
    code = model.kernel_code
    if scheme == Scheme.LAX_FRIEDRICHS:
        return 0.5 * (model.A(ul) + model.A(ur)) - 0.5 * alpha * (ur - ul)
    if code == 0:
        if scheme == Scheme.GODUNOV:
            lo = np.minimum(0.5 * ul * ul, 0.5 * ur * ur)
            lo = np.where((ul <= 0.0) & (ur >= 0.0), 0.0, lo)
            hi = np.maximum(0.5 * ul * ul, 0.5 * ur * ur)
            return np.where(ul <= ur, lo, hi)
        up = np.maximum(ul, 0.0)
        dn = np.minimum(ur, 0.0)
        return 0.5 * up * up + 0.5 * dn * dn
    if code == 1:
        c = model.param
        return c * ul if c >= 0 else c * ur
    if code == 2:
        return ul * ul * ul / 3.0
    return np.array([_generic_flux(model, float(a), float(b), scheme, alpha) for a, b in zip(ul, ur)])
