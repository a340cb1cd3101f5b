"""Hamel-equation mechanics on principal bundles over SO(3), SE(3) and SO(3)xR3.

Modules: ``lie`` (group operations), ``quasi`` (quasi-velocity maps and Hamel
coefficients), ``connection`` (local connections and curvature),
``dynamics`` (reduced equations of motion), ``reconstruction`` (integration
and phases), ``models`` (rolling ball, satellite, rigid body), ``riemann``
(mass-metric geometry) and ``cli``.
"""

from . import connection, dynamics, lie, models, quasi, reconstruction, riemann
from .connection import LocalConnection, curvature, mechanical
from .errors import (BranchError, ConfigError, DivergenceError, HamelMechError, InertiaError, InputError,
                     SingularMapError, StructureError, UnsupportedGroupError)
from .lie import Group, GroupElement, Trivialization
from .reconstruction import geometric_phase, integrate, total_phase
from .system import BundleState, MechanicalSystem

__version__ = "0.1.0"

__all__ = [
    "BranchError", "BundleState", "ConfigError", "DivergenceError", "Group", "GroupElement",
    "HamelMechError", "InertiaError", "InputError", "LocalConnection", "MechanicalSystem",
    "SingularMapError", "StructureError", "Trivialization", "UnsupportedGroupError", "connection",
    "curvature", "dynamics", "geometric_phase", "integrate", "lie", "mechanical", "models", "quasi",
    "reconstruction", "riemann", "total_phase",
]
