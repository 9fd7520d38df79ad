"""Truncated cylindrical Wiener noise and the coefficients ``g_k(x, xi)``.

Built-in models are separable, ``g_k(x, xi) = sigma_k e_k(x) h(xi)``, with the
cosine basis ``e_k(x) = cos((k - 1) pi (x - x_left) / |D|)`` (so ``e_1 = 1``)
and a profile ``h`` evaluated on ``xi`` clamped to ``[-r_clip, r_clip]``.
The clamp is the Lipschitz regularization used in the viscous problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import Field

KINDS = ("additive", "linear_multiplicative", "affine_multiplicative", "custom")
_KERNEL_CODES = {"additive": 0, "linear_multiplicative": 1, "affine_multiplicative": 2}
DEFAULT_R_CLIP = 1.0e3


def _linear_modulus(s):
    return s


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    amplitudes: np.ndarray
    shift: float = 1.0
    r_clip: float = DEFAULT_R_CLIP
    x_left: float = 0.0
    length: float = 1.0
    custom_modes: Optional[Sequence[Callable]] = None
    L: float = field(default=float("nan"))
    modulus: Callable = _linear_modulus

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; choose from {KINDS}")
        amps = np.array(self.amplitudes, dtype=float).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.kind == "custom":
            if self.custom_modes is None or len(self.custom_modes) != amps.size:
                raise ValueError("custom noise needs one callable per amplitude slot")
            if math.isnan(self.L):
                raise ValueError("custom noise must declare its growth constant L")
        elif math.isnan(self.L):
            object.__setattr__(self, "L", self._declared_L())

    @property
    def K(self) -> int:
        return int(self.amplitudes.size)

    @property
    def kernel_code(self) -> int:
        return _KERNEL_CODES.get(self.kind, -1)

    def _profile_bounds(self) -> tuple[float, float, float]:
        """(sup |h|, Lipschitz constant of h, growth factor c with h^2 <= c (1 + xi^2))."""
        R = self.r_clip
        if self.kind == "additive":
            return 1.0, 0.0, 1.0
        if self.kind == "linear_multiplicative":
            return R, 1.0, 1.0
        return abs(self.shift) + R, 1.0, 2.0 * max(self.shift**2, 1.0)

    def _declared_L(self) -> float:
        S = float(np.sum(self.amplitudes**2))
        k = np.arange(self.K)
        S_grad = float(np.sum((self.amplitudes * k * math.pi / self.length) ** 2))
        h_sup, h_lip, growth = self._profile_bounds()
        return max(S * growth, 2.0 * S_grad * h_sup**2, 2.0 * S * h_lip**2)

    # -- evaluation -----------------------------------------------------------

    def basis(self, x) -> np.ndarray:
        """``e_k(x)`` with shape ``x.shape + (K,)``."""
        x = np.asarray(x, dtype=float)
        k = np.arange(self.K)
        return np.cos(np.multiply.outer((x - self.x_left) * math.pi / self.length, k))

    def mode_matrix(self, x) -> np.ndarray:
        """``sigma_k e_k(x_i)`` as an ``(n, K)`` array."""
        return self.basis(x) * self.amplitudes

    def profile(self, xi):
        xi = np.clip(xi, -self.r_clip, self.r_clip)
        if self.kind == "additive":
            return np.ones_like(xi, dtype=float)
        if self.kind == "linear_multiplicative":
            return xi
        return self.shift + xi

    def g(self, x, xi) -> np.ndarray:
        """All coefficients ``g_k(x, xi)``, shape ``broadcast(x, xi).shape + (K,)``."""
        x, xi = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
        if self.kind == "custom":
            xc = np.clip(xi, -self.r_clip, self.r_clip)
            cols = [amp * np.asarray(gk(x, xc), dtype=float) for amp, gk in zip(self.amplitudes, self.custom_modes)]
            return np.stack(cols, axis=-1) if cols else np.zeros(x.shape + (0,))
        return self.mode_matrix(x) * np.asarray(self.profile(xi))[..., None]

    def increment_array(self, x: np.ndarray, u: np.ndarray, dbeta: np.ndarray) -> np.ndarray:
        """``sum_k g_k(x_i, u_i) dbeta_k`` at every cell."""
        if self.K == 0:
            return np.zeros_like(u, dtype=float)
        if self.kind == "custom":
            return self.g(x, u) @ dbeta
        return self.profile(u) * (self.mode_matrix(x) @ dbeta)


def additive(sigma: float = 0.25, K: int = 8, **kw) -> NoiseModel:
    return NoiseModel("additive", decaying_amplitudes(sigma, K), **kw)


def linear_multiplicative(sigma: float = 0.25, K: int = 8, **kw) -> NoiseModel:
    return NoiseModel("linear_multiplicative", decaying_amplitudes(sigma, K), **kw)


def affine_multiplicative(sigma: float = 0.25, K: int = 8, shift: float = 1.0, **kw) -> NoiseModel:
    return NoiseModel("affine_multiplicative", decaying_amplitudes(sigma, K), shift=shift, **kw)


def zero_noise() -> NoiseModel:
    """K = 0: the deterministic problem."""
    return NoiseModel("additive", np.zeros(0))


def decaying_amplitudes(sigma: float, K: int) -> np.ndarray:
    """``sigma_k = sigma / k`` for ``k = 1..K``."""
    if K < 0:
        raise ValueError(f"K must be >= 0, got {K}")
    return sigma / np.arange(1, K + 1, dtype=float)


_BUILTIN = {
    "additive": additive,
    "linear_multiplicative": linear_multiplicative,
    "affine_multiplicative": affine_multiplicative,
}


def noise_from_spec(kind: str, sigma: float, K: int, **kw) -> NoiseModel:
    try:
        factory = _BUILTIN[kind]
    except KeyError:
        raise ValueError(f"unknown noise kind {kind!r}; choose from {sorted(_BUILTIN)}") from None
    return factory(sigma=sigma, K=K, **kw)


def g_squared(model: NoiseModel, x: float, xi: float) -> float:
    """``G^2(x, xi) = sum_k g_k(x, xi)^2``."""
    return float(np.sum(model.g(x, xi) ** 2))


def noise_increment(model: NoiseModel, u: Field, step_increments) -> Field:
    dbeta = np.asarray(step_increments, dtype=float).reshape(-1)
    if dbeta.size != model.K:
        raise ValueError(f"expected {model.K} increments, got {dbeta.size}")
    out = model.increment_array(u.grid.cell_centers, u.values, dbeta)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite noise increment")
    return Field(out, u.grid)


def validate_bounds(model: NoiseModel, n_samples: int = 4000, xi_range: float = 50.0, seed: int = 0) -> dict:
    """Sampled checks of the growth bound and the continuity bound.

    Returns the worst ratios ``lhs / rhs``; both must be <= 1.
    """
    rng = np.random.default_rng(seed)
    x = model.x_left + model.length * rng.random(n_samples)
    y = model.x_left + model.length * rng.random(n_samples)
    xi = rng.uniform(-xi_range, xi_range, n_samples)
    zeta = xi + rng.normal(0.0, 1.0, n_samples) * rng.choice([1e-3, 1e-1, 1.0, 10.0], n_samples)
    G2 = np.sum(model.g(x, xi) ** 2, axis=-1)
    growth = G2 / (model.L * (1.0 + xi**2))
    diff = np.sum((model.g(x, xi) - model.g(y, zeta)) ** 2, axis=-1)
    d = np.abs(xi - zeta)
    rhs = model.L * ((x - y) ** 2 + d * np.asarray(model.modulus(d)))
    ok = rhs > 0
    cont = np.where(ok, diff / np.where(ok, rhs, 1.0), np.where(diff > 0, np.inf, 0.0))
    worst_growth = float(np.max(growth)) if growth.size else 0.0
    worst_cont = float(np.max(cont)) if cont.size else 0.0
    return {
        "growth_ratio": worst_growth,
        "continuity_ratio": worst_cont,
        "passed": worst_growth <= 1.0 + 1e-12 and worst_cont <= 1.0 + 1e-12,
    }


@dataclass(frozen=True)
class WienerPath:
    """Increments of ``K`` independent Brownian motions on a uniform time grid."""

    seed: int
    n_steps: int
    dt: float
    increments: np.ndarray

    @property
    def K(self) -> int:
        return int(self.increments.shape[1])


def sample_path(seed: int, n_steps: int, dt: float, K: int, sign: float = 1.0) -> WienerPath:
    """Draw ``dbeta_k ~ N(0, dt)`` i.i.d. from a Philox stream keyed by ``seed``.

    ``sign=-1`` gives the antithetic partner of the same seed.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if K < 0:
        raise ValueError(f"K must be >= 0, got {K}")
    rng = np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))
    inc = rng.standard_normal((int(n_steps), int(K))) * math.sqrt(dt)
    if sign != 1.0:
        inc = sign * inc
    inc.setflags(write=False)
    return WienerPath(int(seed), int(n_steps), float(dt), inc)


def path_seed(master_seed: int, path_index: int) -> int:
    """64-bit per-path seed; independent of how paths are scheduled on workers."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(path_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
