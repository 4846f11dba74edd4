"""Radau IIa time integration of von Mises elasto-plasticity."""

__version__ = "0.1.0"

from .butcher import ButcherTableau, radau_iia, verify_order_conditions
from .constitutive import MaterialParams, PlasticState, StressResult
from .stage_solver import METHOD_LABELS, IntegratorConfig, consistent_tangent, solve_stages, step
from .strain_path import InterpolationMode, SPDetection, StrainHistory, SwitchingPoint

__all__ = [
    "ButcherTableau",
    "IntegratorConfig",
    "InterpolationMode",
    "METHOD_LABELS",
    "MaterialParams",
    "PlasticState",
    "SPDetection",
    "StrainHistory",
    "StressResult",
    "SwitchingPoint",
    "consistent_tangent",
    "radau_iia",
    "solve_stages",
    "step",
    "verify_order_conditions",
]
