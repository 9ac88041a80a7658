"""Shared types, errors, linear-algebra helpers and the stage pipeline."""

from .errors import RelaxationError
from .state import (
    Classification,
    HypothesisReport,
    ModeData,
    PipelineState,
    ProfileReport,
    ShockData,
    ShockProfile,
)

__all__ = [
    "RelaxationError",
    "Classification",
    "HypothesisReport",
    "ModeData",
    "PipelineState",
    "ProfileReport",
    "ShockData",
    "ShockProfile",
]
