"""Von Mises elasto-plasticity with mixed linear/saturation isotropic hardening.

Strain measure is Green-Lagrange with additive split ``E = Ee + Ep``; the
stress is the second Piola-Kirchhoff tensor of a St. Venant-Kirchhoff law.
Only the hardening derivatives ``K'`` and ``K''`` enter any algorithm, the
free energy itself is never evaluated.
"""

from dataclasses import dataclass, field

import numpy as np

from . import tensor_algebra as ta

SQRT23 = np.sqrt(2.0 / 3.0)


class MaterialError(ValueError):
    pass


@dataclass(frozen=True)
class MaterialParams:
    E: float
    nu: float
    sigma_Y: float
    sigma_inf_minus_Y: float = 0.0
    H: float = 0.0
    delta: float = 0.0
    mu: float = field(init=False)
    kappa: float = field(init=False)

    def __post_init__(self):
        if not self.E > 0:
            raise MaterialError(f"E must be positive, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise MaterialError(f"nu must lie in (-1, 0.5), got {self.nu}")
        for name in ("sigma_Y", "sigma_inf_minus_Y", "H", "delta"):
            if getattr(self, name) < 0:
                raise MaterialError(f"{name} must be non-negative")
        object.__setattr__(self, "mu", self.E / (2.0 * (1.0 + self.nu)))
        object.__setattr__(self, "kappa", self.E / (3.0 * (1.0 - 2.0 * self.nu)))

    @classmethod
    def from_dict(cls, d):
        keys = ("E", "nu", "sigma_Y", "sigma_inf_minus_Y", "H", "delta")
        unknown = set(d) - set(keys)
        if unknown:
            raise MaterialError(f"unknown material fields: {sorted(unknown)}")
        return cls(**{k: float(d[k]) for k in keys if k in d})

    def to_dict(self):
        return {
            "E": self.E,
            "nu": self.nu,
            "sigma_Y": self.sigma_Y,
            "sigma_inf_minus_Y": self.sigma_inf_minus_Y,
            "H": self.H,
            "delta": self.delta,
        }

    def replace(self, **changes):
        d = self.to_dict()
        d.update(changes)
        return MaterialParams(**d)

    @property
    def elasticity(self):
        return ta.isotropic_elasticity(self.kappa, self.mu)


@dataclass(frozen=True)
class PlasticState:
    """History variables of one material point."""

    Ep: np.ndarray = field(default_factory=lambda: np.zeros(6))
    alpha: float = 0.0


@dataclass(frozen=True)
class StressResult:
    S: np.ndarray
    S_dev: np.ndarray
    pressure: float


def hardening(params, alpha):
    """K'(alpha) = H alpha + (sigma_inf - sigma_Y)(1 - exp(-delta alpha))."""
    alpha = np.asarray(alpha, dtype=float)
    return params.H * alpha - params.sigma_inf_minus_Y * np.expm1(-params.delta * alpha)


def hardening_d1(params, alpha):
    alpha = np.asarray(alpha, dtype=float)
    return params.H + params.sigma_inf_minus_Y * params.delta * np.exp(-params.delta * alpha)


def hardening_d2(params, alpha):
    alpha = np.asarray(alpha, dtype=float)
    return -params.sigma_inf_minus_Y * params.delta**2 * np.exp(-params.delta * alpha)


def yield_radius(params, alpha):
    """sqrt(2/3) (sigma_Y + K'(alpha)), the admissible deviatoric stress norm."""
    return SQRT23 * (params.sigma_Y + hardening(params, alpha))


def stress(params, E_total, state):
    E_total = np.asarray(E_total, dtype=float)
    s_dev = 2.0 * params.mu * (ta.deviator(E_total) - state.Ep)
    p = params.kappa * ta.trace(E_total)
    return StressResult(S=p * ta.ONE + s_dev, S_dev=s_dev, pressure=float(p))


def yield_trial(params, E_total, state):
    """Trial yield function with frozen plastic variables; f < 0 is elastic."""
    x = ta.deviator(E_total) - np.asarray(state.Ep, dtype=float)
    return float(2.0 * params.mu * ta.norm(x) - yield_radius(params, state.alpha))
