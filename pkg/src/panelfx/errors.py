"""Exception hierarchy.

Two families map onto CLI exit codes: :class:`DataError` (bad input, exit 2)
and :class:`NumericalError` (an estimator or test cannot be computed, exit 3).
"""


class PanelError(Exception):
    """Base class for every error raised by panelfx."""


class DataError(PanelError, ValueError):
    pass


class NumericalError(PanelError, ArithmeticError):
    pass


# -- data / validation ------------------------------------------------------


class DuplicateCell(DataError):
    def __init__(self, entity, time, row=None):
        self.entity, self.time, self.row = entity, time, row
        super().__init__(f"duplicate observation for ({entity!r}, {time})")


class NonFiniteValue(DataError):
    def __init__(self, row, variable=None, value=None):
        self.row, self.variable, self.value = row, variable, value
        super().__init__(f"row {row}: non-finite value {value!r} for {variable!r}")


class OutOfRange(DataError):
    def __init__(self, variable, value, row=None):
        self.variable, self.value, self.row = variable, value, row
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}{variable}={value} outside [0, 100]")


class UnknownVariable(DataError):
    def __init__(self, variable):
        self.variable = variable
        super().__init__(f"unknown variable {variable!r}")


class EmptyGroup(DataError):
    def __init__(self, entity, variable):
        self.entity, self.variable = entity, variable
        super().__init__(f"entity {entity!r} has no observations of {variable!r}")


class UnmappedEntity(DataError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"entity {label!r} has no category assignment")


class SchemaMismatch(DataError):
    def __init__(self, line, detail=""):
        self.line = line
        super().__init__(f"line {line}: schema mismatch {detail}".rstrip())


class ParseError(DataError):
    def __init__(self, line, column, value=None):
        self.line, self.column, self.value = line, column, value
        super().__init__(f"line {line}, column {column!r}: cannot parse {value!r}")


class UnknownTicker(DataError):
    def __init__(self, line, ticker):
        self.line, self.ticker = line, ticker
        super().__init__(f"line {line}: unknown ticker {ticker!r}")


class DuplicateDomain(DataError):
    def __init__(self, line, domain):
        self.line, self.domain = line, domain
        super().__init__(f"line {line}: domain {domain!r} assigned twice")


class MismatchedFits(DataError):
    pass


class InvalidConfig(DataError):
    pass


class InvalidDf(DataError):
    def __init__(self, df):
        self.df = df
        super().__init__(f"degrees of freedom must be a positive integer, got {df!r}")


class InvalidLevel(DataError):
    def __init__(self, level):
        self.level = level
        super().__init__(f"confidence level must lie in (0, 1), got {level!r}")


# -- numerical ----------------------------------------------------------------


class RankDeficient(NumericalError):
    pass


class TooFewObservations(NumericalError):
    pass


class TooFewEntities(NumericalError):
    pass


class TooManyEntities(NumericalError):
    pass


class DegenerateRegressor(NumericalError):
    pass


class DegenerateBetweenRegression(NumericalError):
    pass


class AllSingletonEntities(NumericalError):
    pass
