"""Exception types shared across the package."""


class CoulombGasError(Exception):
    """Base class for all package-specific errors."""


class ZeroSeparation(CoulombGasError):
    """Two particles coincide, so the interaction kernel is singular."""


class MissingConstants(CoulombGasError):
    """A potential lacks the dissipativity constants required by the caller."""


class InfeasibleFit(CoulombGasError):
    """No positive coercivity coefficient satisfies the sampled drift constraints."""


class StepFailure(CoulombGasError):
    """Adaptive stepping exhausted its halving budget without an admissible sub-step."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class CapHit(CoulombGasError):
    """The certificate value crossed the configured cap (trajectory truncated)."""


class DimensionMismatch(CoulombGasError):
    """An observable was asked for in a dimension it is not defined for."""


class DegenerateSeries(CoulombGasError):
    """A series has no usable window for the requested fit."""


class EmptyEnsemble(CoulombGasError):
    """An ensemble-valued argument contains no states."""


class InvalidConfig(CoulombGasError):
    """A runtime parameter is outside its admissible range."""


class ParseError(CoulombGasError):
    """Configuration text could not be parsed."""


class ValidationError(CoulombGasError):
    """Parsed configuration violates a cross-field constraint."""


class FormatError(CoulombGasError):
    """A binary artifact has the wrong magic or version."""


class TruncationError(CoulombGasError):
    """A binary artifact ends before its declared payload."""
