"""Exception hierarchy shared across the package."""


class KappaFlowError(Exception):
    """Base class for all package errors."""


class GridMismatchError(KappaFlowError, ValueError):
    """Fields living on different grids were combined."""


class DomainError(KappaFlowError, ValueError):
    """A thermodynamic function was evaluated outside rho > 0."""


class VacuumError(DomainError):
    """Density dropped to or below the vacuum floor."""


class BlowUpError(KappaFlowError, FloatingPointError):
    """A run produced non-finite values.

    ``state`` holds the last finite state and ``trajectory`` the snapshots
    recorded before the failure, so callers can dump them.
    """

    def __init__(self, message, state=None, trajectory=None, time=None):
        super().__init__(message)
        self.state = state
        self.trajectory = trajectory
        self.time = time


class ConfigError(KappaFlowError, ValueError):
    """Malformed or inconsistent experiment configuration."""
