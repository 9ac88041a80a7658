"""Exception hierarchy shared by all numerical modules."""

from __future__ import annotations


class RelaxationError(Exception):
    """Base class for every error raised by this package."""


# -- input / hypothesis problems -------------------------------------------


class ModelError(RelaxationError, ValueError):
    """Model callables are inconsistent or evaluate outside their domain."""


class HyperbolicityError(ModelError):
    """A principal matrix has complex spectrum or changes multiplicity."""


class SingularRelaxationError(ModelError):
    """q_v is singular at an equilibrium."""


class DefectiveMatrixError(ModelError):
    """A matrix that must be diagonalizable is not."""


class ClassificationError(RelaxationError, ValueError):
    """Shock indices are inconsistent or the input is not a shock."""


class ConfigError(RelaxationError, ValueError):
    """Experiment configuration cannot be executed."""


class FlowDecayError(RelaxationError, ValueError):
    """A reduced flow does not decay as its expansion requires."""


# -- numerical failures ----------------------------------------------------


class ProfileError(RelaxationError, RuntimeError):
    """No connecting profile was found."""


class SpectralSplittingError(RelaxationError, RuntimeError):
    """Limiting eigenvalues coalesce or leave the consistent-splitting region."""


class EvansError(RelaxationError, RuntimeError):
    """Basis integration overflowed or produced non-finite values."""


class NearEigenvalueError(EvansError):
    """The decaying bases are nearly dependent (lambda close to an eigenvalue)."""


class ContourError(RelaxationError, RuntimeError):
    """Contour sampling failed to close or exceeded its budget."""


class ScatteringError(RelaxationError, RuntimeError):
    """The scattering system is singular (condition (D2) fails)."""


class SylvesterError(RelaxationError, RuntimeError):
    """Sylvester equation is ill-posed (spectra too close)."""


class FrameDegenerationError(RelaxationError, RuntimeError):
    """Transported frame became singular."""


class ConvergenceError(RelaxationError, RuntimeError):
    """An iteration did not converge within its budget."""


class SimulationError(RelaxationError, RuntimeError):
    """Time integration violated CFL or blew up."""
