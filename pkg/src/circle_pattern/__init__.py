"""Spherical circle pattern metrics with prescribed total geodesic curvature."""

from .bigon import BigonGeometry, bigon, bigon_derivatives, center_distance
from .complex import (
    CellComplex,
    ComplexError,
    WeightedEdge,
    beach_ball,
    edge_set_of,
    load_complex,
    parse_complex,
)
from .curvature import CurvatureState, jacobian, potential, total_curvature
from .feasibility import SupportTooLargeError, TargetClass, classify_target
from .flows import (
    ConvergenceError,
    FlowOptions,
    FlowTrace,
    InvalidTargetError,
    NewtonResult,
    SingularJacobianError,
    flow_interior,
    flow_mixed,
    flow_reduced,
    gradient_bound_check,
    newton_solve,
)

__all__ = [
    "BigonGeometry", "bigon", "bigon_derivatives", "center_distance",
    "CellComplex", "ComplexError", "WeightedEdge", "beach_ball", "edge_set_of",
    "load_complex", "parse_complex",
    "CurvatureState", "jacobian", "potential", "total_curvature",
    "SupportTooLargeError", "TargetClass", "classify_target",
    "ConvergenceError", "FlowOptions", "FlowTrace", "InvalidTargetError",
    "NewtonResult", "SingularJacobianError", "flow_interior", "flow_mixed",
    "flow_reduced", "gradient_bound_check", "newton_solve",
]
