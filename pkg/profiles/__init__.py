"""Profile solving, classification and verification."""

from profiles.classify import classify, classify_indices, verify_profile
from profiles.solver import default_halfwidth, fit_tails, predicted_rates, solve_profile

__all__ = [
    "solve_profile",
    "predicted_rates",
    "default_halfwidth",
    "fit_tails",
    "classify",
    "classify_indices",
    "verify_profile",
]
