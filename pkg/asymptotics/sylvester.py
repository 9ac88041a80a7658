"""Commutator (Sylvester) equation d1 X - X d2 = F."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_sylvester

from core.errors import SylvesterError

logger = logging.getLogger(__name__)

MIN_SEPARATION = 1e-10


@dataclass
class SylvesterSolution:
    X: np.ndarray
    residual: float
    separation: float  # min |sigma(d1) - sigma(d2)|
    gain: float  # |X| / |F|


def spectral_separation(d1: np.ndarray, d2: np.ndarray) -> float:
    e1 = np.linalg.eigvals(np.atleast_2d(d1))
    e2 = np.linalg.eigvals(np.atleast_2d(d2))
    return float(np.min(np.abs(e1[:, None] - e2[None, :])))


def sylvester(d1, d2, F, *, min_separation: float = MIN_SEPARATION) -> SylvesterSolution:
    """Solve d1 X - X d2 = F; refuses when the spectra of d1 and d2 nearly meet."""
    d1 = np.atleast_2d(np.asarray(d1))
    d2 = np.atleast_2d(np.asarray(d2))
    F = np.asarray(F).reshape(d1.shape[0], d2.shape[0])
    sep = spectral_separation(d1, d2)
    if sep < min_separation:
        raise SylvesterError(f"spectral separation {sep:.3e} below {min_separation:.1e}")
    X = solve_sylvester(d1, -d2, F)
    residual = float(np.linalg.norm(d1 @ X - X @ d2 - F))
    f_norm = float(np.linalg.norm(F))
    if residual > 1e-12 * (1.0 + f_norm):
        # one step of iterative refinement
        X = X + solve_sylvester(d1, -d2, F - (d1 @ X - X @ d2))
        residual = float(np.linalg.norm(d1 @ X - X @ d2 - F))
    gain = float(np.linalg.norm(X)) / f_norm if f_norm > 0 else 0.0
    logger.debug("sylvester %s x %s: sep=%.3e residual=%.3e gain=%.3g", d1.shape, d2.shape, sep, residual, gain)
    return SylvesterSolution(X=X, residual=residual, separation=sep, gain=gain)
