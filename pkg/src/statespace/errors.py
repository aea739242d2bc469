"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class StateSpaceError(Exception):
    """Base class for every error raised by this package."""


class MatrixFormatError(StateSpaceError):
    """Malformed matrix data: wrong shape, non-finite entries, bad JSON fields,
    or a dimension above the configured cap."""


class DimensionMismatchError(StateSpaceError):
    """Operands have incompatible dimensions."""


class ValidationError(StateSpaceError):
    """A domain invariant failed.

    ``code`` names the violated invariant (one of the ``CODE_*`` constants
    below) and ``amount``, when set, quantifies the violation.
    """

    def __init__(self, code: str, message: str, amount: float | None = None):
        super().__init__(message)
        self.code = code
        self.amount = amount


# Validation error codes.
CODE_NON_HERMITIAN = "non_hermitian"
CODE_NEGATIVE_EIGENVALUE = "negative_eigenvalue"
CODE_TRACE_DEVIATION = "trace_deviation"
CODE_ZERO_VECTOR = "zero_vector"
CODE_WEIGHT_SUM = "weight_sum"
CODE_EMPTY_MIX = "empty_mix"
CODE_NOT_PROJECTION = "not_projection"
CODE_NON_UNITARY = "non_unitary"
CODE_BAD_BASIS = "bad_basis"
CODE_PROBABILITY_DEFECT = "probability_defect"
CODE_NOT_UNIT_VECTOR = "not_unit_vector"
CODE_BAD_SEED = "bad_seed"
CODE_NOT_REPAIRABLE = "not_repairable"
