"""Exception hierarchy.

Validation problems (bad input, partial operations that are undefined) derive
from :class:`ValidationError`; conditions that refuse a probabilistic reading
derive from :class:`ConsistencyError`; anything that indicates broken numerics
derives from :class:`NumericalError`. The CLI maps these to exit codes 2, 3
and 4 respectively.
"""


class HistqError(Exception):
    """Base class for all package errors."""


class ValidationError(HistqError, ValueError):
    pass


class ConsistencyError(HistqError):
    pass


class NumericalError(HistqError, ArithmeticError):
    pass


# numlin
class NotHermitian(ValidationError):
    pass


class NotPsd(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DimensionCapExceeded(ValidationError):
    pass


# effects
class InvalidEffect(ValidationError):
    pass


class InvalidState(ValidationError):
    pass


class InvalidPovm(ValidationError):
    pass


class InvalidAlpha(ValidationError):
    pass


class NotSummable(ValidationError):
    pass


class NotComparable(ValidationError):
    pass


# histories
class InvalidSupport(ValidationError):
    pass


class NotProjectorHistory(ValidationError):
    pass


class TimeNotAfterFinal(ValidationError):
    pass


# decoherence
class NotConsistent(ConsistencyError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NullUnit(ConsistencyError):
    pass


class NotInCommonAlgebra(ValidationError):
    pass


# proj_lattice
class SupportMismatch(ValidationError):
    pass


class NotProjectiveMeasurement(ValidationError):
    pass


class NotDisjoint(ValidationError):
    pass


class NotComplete(ValidationError):
    pass


# effect_sums
class NotAdmissible(ValidationError):
    pass


class IncompleteHint(ValidationError):
    pass


class SlotMismatch(ValidationError):
    pass


# logic
class ZeroCondition(ConsistencyError):
    pass


class MeetUndefined(ValidationError):
    pass


class InternalError(NumericalError):
    """A structural invariant failed beyond tolerance."""


# scenario_cli
class ScenarioError(ValidationError):
    pass
