"""Volume functionals on toric data.

Soliton vector fields of toric Fano polytopes, critical points of the
normalized Einstein-Hilbert functional on moment polytopes, and Reeb-field
volume minimization on Gorenstein toric cones.
"""
__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .errors import (AdmissibilityError, ConvergenceError, GeometryError,  # noqa: E402
                     PropernessError, ReebConeError)
from .polytope import (MomentCone, Polytope, Simplex, boundary_pieces,  # noqa: E402
                       build_moment_cone, build_polytope, triangulate,
                       validate_delzant, validate_reflexive)

__all__ = [
    "BACKEND",
    "AdmissibilityError",
    "ConvergenceError",
    "GeometryError",
    "PropernessError",
    "ReebConeError",
    "MomentCone",
    "Polytope",
    "Simplex",
    "boundary_pieces",
    "build_moment_cone",
    "build_polytope",
    "triangulate",
    "validate_delzant",
    "validate_reflexive",
]
