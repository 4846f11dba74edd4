"""Stage strains within a time step and elastic-plastic switching points.

Within ``[t_n, t_n+1]`` a normalized time ``tau = (t - t_n) / dt`` is used.
Total strain at ``tau`` is reconstructed from the samples
``E_prev (tau=-1)``, ``E_n (tau=0)`` and ``E_next (tau=1)``.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import tensor_algebra as ta
from .constitutive import yield_radius


class InterpolationMode(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    QUADRATIC = "quadratic"

    @property
    def order(self):
        return {"constant": 1, "linear": 2, "quadratic": 3}[self.value]


class SPDetection(str, Enum):
    OFF = "off"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    EXTRAPOLATION = "extrapolation"


class ModeUnavailableError(ValueError):
    """Quadratic reconstruction requested without a strain sample at t_n-1."""


@dataclass(frozen=True)
class StrainHistory:
    E_n: np.ndarray
    E_next: np.ndarray
    dt: float
    E_prev: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class SwitchingPoint:
    x: float
    t_sp: float
    E_sp: np.ndarray

    @property
    def degenerate(self):
        """Plastic already at t_n (x = 0); the step is not shortened."""
        return self.x == 0.0


ROOT_MAXITER = 100


def interpolation_weights(mode, tau):
    """Weights ``(w_prev, w_n, w_next)`` of the reconstruction at ``tau``."""
    mode = InterpolationMode(mode)
    if mode is InterpolationMode.CONSTANT:
        return 0.0, 0.0, 1.0
    if mode is InterpolationMode.LINEAR:
        return 0.0, 1.0 - tau, tau
    return 0.5 * tau * (tau - 1.0), 1.0 - tau * tau, 0.5 * tau * (tau + 1.0)


def interpolation_slopes(mode, tau):
    """d/dtau of :func:`interpolation_weights`."""
    mode = InterpolationMode(mode)
    if mode is InterpolationMode.CONSTANT:
        return 0.0, 0.0, 0.0
    if mode is InterpolationMode.LINEAR:
        return 0.0, -1.0, 1.0
    return tau - 0.5, -2.0 * tau, tau + 0.5


def _combine(weights, E_prev, E_n, E_next):
    w_prev, w_n, w_next = weights
    out = w_n * np.asarray(E_n, dtype=float) + w_next * np.asarray(E_next, dtype=float)
    if w_prev != 0.0:
        out = out + w_prev * np.asarray(E_prev, dtype=float)
    return out


def stage_strain(history, mode, ci):
    mode = InterpolationMode(mode)
    if mode is InterpolationMode.QUADRATIC and history.E_prev is None:
        raise ModeUnavailableError("quadratic interpolation needs E_prev")
    if ci == 1.0:
        return np.array(history.E_next, dtype=float)
    return _combine(interpolation_weights(mode, ci), history.E_prev, history.E_n, history.E_next)


def _sp_residual(params, state, path):
    k = yield_radius(params, state.alpha)
    two_mu = 2.0 * params.mu
    Ep = np.asarray(state.Ep, dtype=float)

    def g(x):
        return float(two_mu * ta.norm(ta.deviator(path(x)) - Ep) - k)

    return g


def _solve_sp(g, path, history, t_n, upper=1.0):
    g0 = g(0.0)
    g1 = g(upper)
    if g1 < 0.0:
        return None
    if g0 >= 0.0:
        return SwitchingPoint(x=0.0, t_sp=t_n, E_sp=np.array(history.E_n, dtype=float))
    x = brentq(g, 0.0, upper, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=ROOT_MAXITER)
    return SwitchingPoint(x=x, t_sp=t_n + x * history.dt, E_sp=path(x))


def detect_sp_linear(history, params, state, t_n=0.0):
    """Switching point on the straight line from E_n to E_next, or ``None``."""
    E_n = np.asarray(history.E_n, dtype=float)
    dE = np.asarray(history.E_next, dtype=float) - E_n

    def path(x):
        return E_n + x * dE

    return _solve_sp(_sp_residual(params, state, path), path, history, t_n)


def detect_sp_quadratic(history, params, state, t_n=0.0):
    if history.E_prev is None:
        raise ModeUnavailableError("quadratic switching-point detection needs E_prev")

    def path(x):
        return _combine(interpolation_weights("quadratic", x), history.E_prev, history.E_n, history.E_next)

    return _solve_sp(_sp_residual(params, state, path), path, history, t_n)


def detect_sp_extrapolation(history, params, state, t_n=0.0, fallback=True):
    """Switching point on the line extrapolated from E_prev and E_n.

    When the extrapolated line does not reach the yield surface within the
    step, linear detection is used instead (``fallback=True``) or ``None`` is
    returned.
    """
    if history.E_prev is None:
        raise ModeUnavailableError("extrapolation-based detection needs E_prev")
    E_n = np.asarray(history.E_n, dtype=float)
    if _sp_residual(params, state, lambda x: np.asarray(history.E_next, dtype=float))(1.0) < 0.0:
        return None
    slope = E_n - np.asarray(history.E_prev, dtype=float)

    def path(x):
        return E_n + x * slope

    g = _sp_residual(params, state, path)
    if g(0.0) >= 0.0:
        return SwitchingPoint(x=0.0, t_sp=t_n, E_sp=E_n.copy())
    if g(1.0) < 0.0:
        return detect_sp_linear(history, params, state, t_n) if fallback else None
    x = brentq(g, 0.0, 1.0, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=ROOT_MAXITER)
    return SwitchingPoint(x=x, t_sp=t_n + x * history.dt, E_sp=path(x))


def post_sp_stage_strain(history, variant, sp, ci):
    """Total strain at stage ``ci`` of the interval shortened to ``[t_sp, t_n+1]``.

    Linear and quadratic detection keep their own reconstruction, evaluated at
    ``tau = x + ci (1 - x)``; extrapolation uses the straight line from E_sp
    to E_next.
    """
    variant = SPDetection(variant)
    if variant is SPDetection.EXTRAPOLATION:
        return sp.E_sp + ci * (np.asarray(history.E_next, dtype=float) - sp.E_sp)
    mode = InterpolationMode.QUADRATIC if variant is SPDetection.QUADRATIC else InterpolationMode.LINEAR
    return stage_strain(history, mode, sp.x + ci * (1.0 - sp.x))
