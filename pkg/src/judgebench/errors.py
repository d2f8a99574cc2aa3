"""Exception hierarchy shared by every judgebench module."""


class JudgebenchError(Exception):
    """Base class for all library errors."""


class ParameterError(JudgebenchError, ValueError):
    """An argument is outside the operation's domain."""


class EvaluationError(JudgebenchError, ValueError):
    """A formula refers to something the evaluation context cannot bind."""


class ValidationError(JudgebenchError, ValueError):
    """A model, formula or document violates a structural invariant."""


class CapacityError(JudgebenchError):
    """A state space or randomness space exceeds the configured bound."""

    def __init__(self, message: str, count: int | None = None, bound: int | None = None):
        super().__init__(message)
        self.count = count
        self.bound = bound


class FormulaSyntaxError(JudgebenchError, ValueError):
    """Raised by the formula parser; carries a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column
