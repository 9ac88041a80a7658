"""Direct time integration of the linearized and nonlinear relaxation systems."""

from simulate.experiments import (
    DecayReport,
    GreensComparison,
    NonlinearReport,
    decay_report,
    greens_compare,
    near_delta,
    nonlinear_experiment,
)
from simulate.linear import SimRun, evolve_linear
from simulate.nonlinear import evolve_nonlinear

__all__ = [
    "SimRun",
    "evolve_linear",
    "evolve_nonlinear",
    "decay_report",
    "DecayReport",
    "greens_compare",
    "GreensComparison",
    "near_delta",
    "nonlinear_experiment",
    "NonlinearReport",
]
