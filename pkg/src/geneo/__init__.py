"""Equivariant non-expansive operators on sampled circle functions,
0-degree sublevel persistence, and the bottleneck matching distance."""

from .circle import (
    FunctionSpace,
    GridCircle,
    GridMismatchError,
    Group,
    GroupElement,
    SampledFunction,
    act,
    builtin_function,
    membership_check,
    natural_pseudo_distance,
    sup_distance,
)
from .matching import Matching, bottleneck, bottleneck_distance
from .operators import (
    GeometricCoefficients,
    Operator,
    RotationFamily,
    TruncationPolicy,
    apply,
    compose,
    identity,
    lipschitz_combine,
    norm_p,
    power_mean,
    power_mean_values,
    precompose,
    series,
    verify_equivariance,
    verify_nonexpansivity,
)
from .opdsl import elaborate, parse, parse_operator, print_expr
from .persistence import PersistenceDiagram, diagram_equal, sublevel_diagram
from .approximation import gap_report, lower_bound

__version__ = "0.1.0"

__all__ = [
    "FunctionSpace", "GridCircle", "GridMismatchError", "Group", "GroupElement",
    "SampledFunction", "act", "builtin_function", "membership_check",
    "natural_pseudo_distance", "sup_distance",
    "Matching", "bottleneck", "bottleneck_distance",
    "GeometricCoefficients", "Operator", "RotationFamily", "TruncationPolicy",
    "apply", "compose", "identity", "lipschitz_combine", "norm_p",
    "power_mean", "power_mean_values", "precompose", "series",
    "verify_equivariance", "verify_nonexpansivity",
    "elaborate", "parse", "parse_operator", "print_expr",
    "PersistenceDiagram", "diagram_equal", "sublevel_diagram",
    "gap_report", "lower_bound",
]
