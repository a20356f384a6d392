"""Exception hierarchy.

Usage errors (wrong space, bad arguments) are distinct from geometric
precondition violations and from internal consistency failures, because
the CLI maps them to different exit codes.
"""


class CatflowError(Exception):
    """Base class for all library errors."""


class UsageError(CatflowError):
    """Caller violated an API contract (programming error)."""


class SpaceMismatchError(UsageError):
    """Points from different spaces were combined."""


class CapabilityError(UsageError):
    """The backend does not support the requested operation."""


class PreconditionError(CatflowError):
    """A geometric hypothesis fails; carries a witness when available."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class GeodesicUniquenessError(PreconditionError):
    """Requested a geodesic beyond the uniqueness radius (e.g. antipodes)."""


class ResolutionError(PreconditionError):
    """An approximate backend was queried below its resolution."""


class ConfigError(UsageError):
    """Invalid experiment configuration."""


class InternalConsistencyError(CatflowError):
    """A numerical invariant the code relies on was violated (likely a bug)."""


class CheckFailure(CatflowError):
    """A verification check failed (distinct exit code in the CLI)."""
