"""Exception hierarchy and CLI exit codes."""


class RelayGameError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RelayGameError):
    """Bad input: field out of range, malformed scenario file, unknown preset."""


class DimensionError(ValidationError):
    """A vector's length disagrees with the relay count."""


class DegenerateGameError(RelayGameError):
    """No sensible-target partition exists for these parameters."""


class InfeasibleEquilibriumError(RelayGameError):
    """Closed-form equilibrium leaves its validity region; refusing to clamp."""


class NoFeasibleMessageCountError(RelayGameError):
    """Every candidate message count has non-positive authenticated payload."""


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_RUNTIME = 4
