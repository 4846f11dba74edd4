"""Minimal total-Lagrangian hex8 finite elements."""

from .hex8 import ElementInversionError, green_lagrange_strain
from .mesh import Mesh, MeshError, annulus_quarter_mesh, biaxial_mesh, box_nodes, simple_shear_mesh, write_mesh_text
from .solver import FESolver, GaussPointError, GlobalState, NonConvergenceError, StepInfo

__all__ = [
    "ElementInversionError",
    "FESolver",
    "GaussPointError",
    "GlobalState",
    "Mesh",
    "MeshError",
    "NonConvergenceError",
    "StepInfo",
    "annulus_quarter_mesh",
    "biaxial_mesh",
    "box_nodes",
    "green_lagrange_strain",
    "simple_shear_mesh",
    "write_mesh_text",
]
