"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to, so the command-line
layer never has to enumerate error types.
"""


class LabError(Exception):
    exit_code = 1


class DimensionError(LabError, ValueError):
    """Operands live on groups of different order or have the wrong shape."""

    exit_code = 2


class UnsupportedOrderError(LabError, ValueError):
    exit_code = 2


class DegenerateOverlapError(LabError, ValueError):
    exit_code = 2


class UndefinedInputError(LabError, ValueError):
    """Input for which the requested quantity is undefined (e.g. a zero signal)."""

    exit_code = 2


class PreconditionError(LabError, ValueError):
    exit_code = 2


class BudgetError(LabError):
    """The requested search exceeds the enumeration cap."""

    exit_code = 3


class InapplicableBoundError(LabError):
    exit_code = 4


class InvalidSpecError(LabError, ValueError):
    exit_code = 5


class PhasePropagationError(LabError):
    """Two signals are not related by per-band unimodular factors."""

    exit_code = 1

    def __init__(self, message, worst_label=None, residual=None):
        super().__init__(message)
        self.worst_label = worst_label
        self.residual = residual
