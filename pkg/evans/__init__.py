"""Evans function, resolvent kernel, contour windings and stability verdict."""

from evans.contour import Contour, ContourReport, circle, default_contours, evans_on_contour, outer_contour
from evans.function import AdjointBasis, EvansSetup, EvansValue, adjoint_basis, evans_batch, evans_value
from evans.modes import ModeExpansion, coefficient_matrix, mode_expansion
from evans.resolvent import StoredBases, resolvent_apply, resolvent_jump, resolvent_kernel, stored_bases
from evans.verdict import StabilityVerdict, liu_majda_delta, liu_majda_determinant, stability_verdict

__all__ = [
    "coefficient_matrix",
    "mode_expansion",
    "ModeExpansion",
    "evans_value",
    "evans_batch",
    "EvansValue",
    "EvansSetup",
    "adjoint_basis",
    "AdjointBasis",
    "resolvent_kernel",
    "resolvent_jump",
    "resolvent_apply",
    "stored_bases",
    "StoredBases",
    "Contour",
    "ContourReport",
    "circle",
    "outer_contour",
    "default_contours",
    "evans_on_contour",
    "liu_majda_delta",
    "liu_majda_determinant",
    "stability_verdict",
    "StabilityVerdict",
]
