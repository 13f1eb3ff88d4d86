"""Enums for geometric control experiments."""

from enum import StrEnum


class DomainKind(StrEnum):
    INTERVAL = "interval"
    SQUARE = "square"
    DISC = "disc"
    HALF_PLANE = "half_plane"
    LEVEL_SET = "level_set"


class MetricKind(StrEnum):
    FLAT = "flat"
    CONFORMAL = "conformal"
    MATRIX = "matrix"
    PERTURBED = "perturbed"


class Regularity(StrEnum):
    C1 = "C1"
    LIPSCHITZ = "Lipschitz"


class PerturbationMode(StrEnum):
    CONFORMAL = "conformal"
    MATRIX = "matrix"


class BoundaryTag(StrEnum):
    ELLIPTIC = "Elliptic"
    HYPERBOLIC_PLUS = "HyperbolicPlus"
    HYPERBOLIC_MINUS = "HyperbolicMinus"
    GLANCING_DIFFRACTIVE = "GlancingDiffractive"
    GLANCING_GLIDING = "GlancingGliding"
    GLANCING_ORDER3 = "GlancingOrder3"


class EscapeDirection(StrEnum):
    FUTURE = "future"
    PAST = "past"


class GlancingRule(StrEnum):
    BOTH = "both-continuations"
    GLIDING_FIRST = "gliding-first"
    INTERIOR_FIRST = "interior-first"


class SegmentKind(StrEnum):
    INTERIOR = "interior"
    GLIDING = "gliding"


class Verdict(StrEnum):
    HOLDS = "holds"
    FAILS = "fails"
    INDETERMINATE = "indeterminate"


class RegionKind(StrEnum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"


class GccMode(StrEnum):
    STRONG = "strong"
    WEAK = "weak"


class Observation(StrEnum):
    TIME_DERIVATIVE = "dt"
    NORMAL_DERIVATIVE = "dn"


class QuantizationKind(StrEnum):
    FULL = "full"
    TANGENTIAL = "tangential"
    MULTIPLIER = "multiplier"


class SolverKind(StrEnum):
    FD = "fd"
    FEM = "fem"
