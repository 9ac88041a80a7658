"""Relaxation models, Jacobians and equilibrium data."""

from models.base import RelaxationModel, jacobians, relaxation_blocks, validate_model
from models.equilibrium import (
    DispersionFit,
    chapman_enskog,
    check_hypotheses,
    dispersion_exact,
    dissipativity_theta,
    equilibrium_data,
    fit_dispersion_rates,
    hyperbolic_modes,
    mode_data,
    rest_point_matrix,
    rest_point_rates,
    track_multiplicities,
)
from models.jin_xin import burgers_jin_xin, jin_xin

__all__ = [
    "RelaxationModel",
    "jacobians",
    "relaxation_blocks",
    "validate_model",
    "jin_xin",
    "burgers_jin_xin",
    "equilibrium_data",
    "chapman_enskog",
    "hyperbolic_modes",
    "mode_data",
    "rest_point_matrix",
    "rest_point_rates",
    "track_multiplicities",
    "dispersion_exact",
    "dissipativity_theta",
    "fit_dispersion_rates",
    "DispersionFit",
    "check_hypotheses",
]
