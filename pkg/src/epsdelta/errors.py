"""Exception hierarchy shared by the library and the CLI."""


class EpsDeltaError(Exception):
    pass


class ExprError(EpsDeltaError):
    """Malformed expression, unknown identifier or too many variables."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DomainError(EpsDeltaError, ArithmeticError):
    """A function was evaluated outside its domain."""


class CoincidentPointsError(EpsDeltaError):
    pass


class InvalidBracketError(EpsDeltaError, ValueError):
    pass


class IterationLimitError(EpsDeltaError):
    """A search ran out of iterations; carries its best estimate so far."""

    def __init__(self, message: str, best: float, width: float, iterations: int):
        super().__init__(f"{message} (best={best!r}, width={width!r}, iterations={iterations})")
        self.best = best
        self.width = width
        self.iterations = iterations


class NoSignChangeError(EpsDeltaError):
    pass


class HypothesisViolation(EpsDeltaError):
    """The point violates an assumption the solver cannot work without (f'(x) = 0)."""


class BracketError(EpsDeltaError):
    """No enclosing bracket was found within the expansion budget."""

