"""Exception hierarchy. Everything raised on bad domain input derives from IbltError."""


class IbltError(ValueError):
    pass


# degree distributions
class NonUnitMass(IbltError):
    pass


class NonPositiveDegree(IbltError):
    pass


class DegreeOutOfRange(IbltError):
    pass


class DuplicateDegree(IbltError):
    pass


class NegativeProbability(IbltError):
    pass


class DomainError(IbltError):
    pass


class NonPositiveLoad(IbltError):
    pass


# density evolution
class BracketFailure(IbltError):
    pass


class UndefinedThreshold(IbltError):
    """Raised for distributions with degree-1 mass, where the zero fixed point does not exist."""


# table
class DegreeExceedsCells(IbltError):
    pass


class KeyLengthMismatch(IbltError):
    pass


class ValueLengthMismatch(IbltError):
    pass


class CorruptCell(IbltError):
    """A count-1 cell whose key accumulator is not the hash of its value accumulator."""


class NegativeCount(IbltError):
    pass


class FormatError(IbltError):
    pass


# reconciliation
class ParameterMismatch(IbltError):
    pass


# annealer
class MoveFailure(IbltError):
    pass
