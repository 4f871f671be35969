"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: invalid input -> 1, budget -> 2,
numerical failure -> 3.
"""


class QGVertexError(Exception):
    exit_code = 3


class InvalidInputError(QGVertexError, ValueError):
    exit_code = 1


class ThresholdError(InvalidInputError):
    """Energy sits exactly on a channel threshold E == V_i."""


class BudgetError(QGVertexError):
    exit_code = 2

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NumericalError(QGVertexError):
    exit_code = 3


class ResonanceError(NumericalError):
    """The scattering linear system is (numerically) singular at this k."""

    def __init__(self, message, k=None, d=None):
        super().__init__(message)
        self.k = k
        self.d = d
