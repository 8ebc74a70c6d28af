"""Exception types shared across the package."""


class LogAbstractionError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(LogAbstractionError):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EmptyLog(LogAbstractionError):
    pass


class UnknownClass(LogAbstractionError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownAttribute(LogAbstractionError):
    pass


class ConstraintSyntaxError(LogAbstractionError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class SemanticError(LogAbstractionError):
    pass


class NoInstances(LogAbstractionError):
    pass


class NotAPartition(LogAbstractionError):
    pass


class NoCandidates(LogAbstractionError):
    pass


class Infeasible(LogAbstractionError):
    """Raised when no grouping satisfies the constraints.

    ``report`` carries an :class:`~logabstract.optimizer.InfeasibilityReport`
    when one could be assembled.
    """

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class SolverTimeout(LogAbstractionError):
    """The exact solver ran out of time before finding any cover."""


class TooFewGroups(LogAbstractionError):
    """A clustering measure needs at least two groups."""
