"""
Exception hierarchy for kronred.

Every error carries the CLI exit code it maps to, so command handlers can
translate failures without a lookup table.
"""


class KronredError(Exception):
    """Base class for all library errors."""
    exit_code = 5

    def __init__(self, message, field=None):
        super().__init__(message)
        self.message = message
        self.field = field

    def __str__(self):
        if self.field:
            return f"{self.field}: {self.message}"
        return self.message


class InvalidInput(KronredError, ValueError):
    """Malformed input; ``field`` names the offending entry."""
    exit_code = 2


class DimensionError(InvalidInput):
    """Input has the wrong size for the requested operation."""


class ClassError(InvalidInput):
    """Input belongs to the wrong Laplacian class or parameter regime."""


class CutsetDegenerate(InvalidInput):
    """The cut does not separate the boundary or carries no susceptance."""


class ConnectivityError(KronredError):
    """The graph (or a perturbed graph) is disconnected."""
    exit_code = 3


class IllConditionedError(KronredError):
    """The interior block is numerically singular."""
    exit_code = 4

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class SingularPivotError(KronredError):
    """A pivot vanished during iterative elimination."""


class DecompositionUnavailable(KronredError):
    """The loop-less interior block is singular, so no self-loop split exists."""


class CompatibilityError(KronredError):
    """Currents do not sum to zero on a loop-less reduced network."""


class PerturbationInvalid(KronredError):
    """A perturbation leaves the class of loopy Laplacians."""


class SingularUpdateError(KronredError):
    """The rank-one update denominator vanishes."""


class SingularReconstruction(KronredError):
    """A matrix reconstructed from resistances is not invertible."""


class UniformityError(KronredError):
    """Measured resistances are not uniform enough for the resistive test."""


class InvariantBreach(KronredError):
    """A guaranteed numerical property failed beyond round-off."""


class OutputUnwritable(KronredError):
    """The result could not be written to ``--output``."""


class IsolatedGroundWarning(UserWarning):
    """A loop-less matrix was augmented, so the ground node is isolated."""


class MetricViolationWarning(UserWarning):
    """A resistance matrix breaks the triangle inequality beyond tolerance."""
