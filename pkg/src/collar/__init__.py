"""Collar extensions of mean-convex boundaries with non-negative scalar curvature.

Given the second-order jet ``(h0, h0', h0'')`` of a strictly mean-convex
boundary, build a collar ``alpha(t)^2 dt^2 + h(t)`` whose far end is strictly
convex, totally geodesic or strictly concave and whose scalar curvature stays
non-negative, then verify all of it numerically.
"""

from .config import RunConfig, Tolerances, load_config
from .constants import PropositionConstants, SampleSpec, audit_bounds, estimate_constants
from .curvature import CurvatureField, oracle_scalar, riccati_identity_check, slice_scalar
from .errors import (
    ArgumentError,
    AuditFailure,
    CollarError,
    DenominatorVanished,
    InternalConsistencyError,
    MeanConvexityViolation,
    NonConvergence,
    PositivityError,
    ResolutionError,
    TangencyAtEndpoint,
)
from .jet import AnalyticCollarSpec, BoundaryJet, jet_from_analytic
from .metric import CollarMetric, path_h
from .pipeline import ExtensionPlan, ExtensionReport, choose_epsilon, extend, verify_examples
from .profiles import ProfileSet, eval_F, eval_G, eval_H
from .tensors import BoundaryGrid, SymTensorField
from .warp import WarpFactor, alpha2, find_a0, match_tangency

__version__ = "0.1.0"

__all__ = [
    "AnalyticCollarSpec",
    "ArgumentError",
    "AuditFailure",
    "BoundaryGrid",
    "BoundaryJet",
    "CollarError",
    "CollarMetric",
    "CurvatureField",
    "DenominatorVanished",
    "ExtensionPlan",
    "ExtensionReport",
    "InternalConsistencyError",
    "MeanConvexityViolation",
    "NonConvergence",
    "PositivityError",
    "ProfileSet",
    "PropositionConstants",
    "ResolutionError",
    "RunConfig",
    "SampleSpec",
    "SymTensorField",
    "TangencyAtEndpoint",
    "Tolerances",
    "WarpFactor",
    "alpha2",
    "audit_bounds",
    "choose_epsilon",
    "estimate_constants",
    "eval_F",
    "eval_G",
    "eval_H",
    "extend",
    "find_a0",
    "jet_from_analytic",
    "load_config",
    "match_tangency",
    "oracle_scalar",
    "path_h",
    "riccati_identity_check",
    "slice_scalar",
    "verify_examples",
    "__version__",
]
