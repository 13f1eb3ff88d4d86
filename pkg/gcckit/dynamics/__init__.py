"""Boundary laws, interior flow and generalized bicharacteristics."""

from .boundary import (
    BoundaryClass,
    classify,
    gliding_field,
    hyperbolic_lift,
    is_escape_point,
    reflect,
    second_normal_derivative,
)
from .flow import TrajectorySegment, flow_interior, integrate_interior
from .generalized import (
    BoundaryEvent,
    BranchPolicy,
    GeneralizedTrajectory,
    Jump,
    advance_generalized,
)
from .tube import ReachTube, reach_tube

__all__ = [
    "BoundaryClass",
    "BoundaryEvent",
    "BranchPolicy",
    "GeneralizedTrajectory",
    "Jump",
    "ReachTube",
    "TrajectorySegment",
    "advance_generalized",
    "classify",
    "flow_interior",
    "gliding_field",
    "hyperbolic_lift",
    "integrate_interior",
    "is_escape_point",
    "reach_tube",
    "reflect",
    "second_normal_derivative",
]
