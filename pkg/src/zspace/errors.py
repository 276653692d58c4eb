"""Exception types shared across the package."""


class ExpressionError(ValueError):
    """Malformed function expression.

    ``position`` is a 0-based byte offset into the source text; ``expected``
    lists what the parser would have accepted there.
    """

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        super().__init__(f"{message} (offset {position})")
        self.position = position
        self.expected = tuple(expected)


class UnknownFunctionError(ExpressionError):
    """Identifier is neither a coordinate nor a known function name."""


class BadCoordinateError(ExpressionError):
    """Coordinate index is not a positive integer (axes are 1-based)."""


class QuadratureBudgetError(RuntimeError):
    """Requested node count exceeds the configured evaluation budget."""


class NonFiniteSampleError(ArithmeticError):
    """A quadrature node produced NaN or an infinity.

    Raised instead of silently dropping the node, which would bias every
    average built on the rule. ``node`` maps axis index to node coordinate.
    """

    def __init__(self, message: str, node: dict[int, float]):
        super().__init__(message)
        self.node = dict(node)


class EmptySearchError(LookupError):
    """No cube in the search family contains the requested point."""


class FamilyRangeError(IndexError):
    """Cube rank outside the configured family truncation."""
