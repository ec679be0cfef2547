"""Convex polyhedral hyperbolic cusps with prescribed boundary metric.

A hyperbolic cone metric on the torus with positive singular curvatures is
the boundary of a unique convex polyhedral cusp.  The cusp is found by
maximizing a concave total scalar curvature over the lengths of the
particles (the edges from the boundary vertices to the cusp end).
"""

from .cusp import (CuspState, build_state, feasibility_margin, is_bad,
                   make_feasible, pd_values)
from .develop import DevelopedCusp, develop, export_json, export_obj, to_klein
from .errors import (BoundaryStall, Infeasible, InputError, MaxIterExceeded,
                     PolycuspError, RequiresZeroCurvature, TargetSumNonzero)
from .functional import (curvature_vector, hessian, nullspace_analysis,
                         total_scalar_curvature, volume)
from .prism import Horoprism, build_prism
from .solver import (SolveOptions, SolveReport, rigidity_report, solve_cusp,
                     solve_particles)
from .surface import (ConeSurface, corner_angle, delaunay, flip, load_surface)

__version__ = "0.1.0"

__all__ = [
    "BoundaryStall", "ConeSurface", "CuspState", "DevelopedCusp", "Horoprism",
    "Infeasible", "InputError", "MaxIterExceeded", "PolycuspError",
    "RequiresZeroCurvature", "SolveOptions", "SolveReport", "TargetSumNonzero",
    "build_prism", "build_state", "corner_angle", "curvature_vector",
    "delaunay", "develop", "export_json", "export_obj", "feasibility_margin",
    "flip", "hessian", "is_bad", "load_surface", "make_feasible",
    "nullspace_analysis", "pd_values", "rigidity_report", "solve_cusp",
    "solve_particles", "to_klein", "total_scalar_curvature", "volume",
]
