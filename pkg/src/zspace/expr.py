"""Expression DSL for function bodies over coordinates x1, x2, ...

Grammar (normative):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := NUMBER | COORD | FUNC '(' expr ')' | '(' expr ')' | '-' factor
    COORD  := 'x' digits          (1-based axis index)
    FUNC   := abs | log | exp | sin | cos | sqrt | step

Whitespace is insignificant. Parse errors carry 0-based byte offsets.

``step(u)`` is 1 for u >= 0 and 0 otherwise (closed on the left); it is the
only discontinuous primitive, and indicators are built from step differences.
Domain faults (log of a nonpositive value, sqrt of a negative, division by
zero) evaluate to a non-finite marker (NaN/inf), never to a silent zero.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

import numpy as np

from .errors import BadCoordinateError, ExpressionError, UnknownFunctionError

FUNCTIONS = ("abs", "log", "exp", "sin", "cos", "sqrt", "step")


@dataclass(frozen=True)
class Literal:
    value: float


@dataclass(frozen=True)
class Coord:
    index: int  # 1-based


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' or a FUNCTIONS name
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


Expr = Union[Literal, Coord, Unary, Binary]


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> Iterator[tuple[str, str, int]]:
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            yield kind, m.group(), pos
        pos = m.end()
    yield "end", "", len(text)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = list(_tokenize(text))
        self.i = 0

    @property
    def current(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, got, pos = self.current
        if got != value:
            raise ExpressionError(
                f"expected {value!r}", pos, expected=(value,)
            )
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, got, pos = self.current
        if kind != "end":
            raise ExpressionError(
                f"unexpected trailing input {got!r}", pos, expected=("end of input",)
            )
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.current[1] in ("+", "-"):
            op = self.advance()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.current[1] in ("*", "/"):
            op = self.advance()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        kind, value, pos = self.current
        if value == "-":
            self.advance()
            return Unary("neg", self.factor())
        if value == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "num":
            self.advance()
            return Literal(float(value))
        if kind == "name":
            self.advance()
            m = re.fullmatch(r"x(\d+)", value)
            if m:
                index = int(m.group(1))
                if index == 0:
                    raise BadCoordinateError(
                        "coordinate indices are 1-based; x0 is invalid", pos
                    )
                return Coord(index)
            if value in FUNCTIONS:
                self.expect("(")
                node = self.expr()
                self.expect(")")
                return Unary(value, node)
            raise UnknownFunctionError(f"unknown function {value!r}", pos)
        raise ExpressionError(
            "expected a number, coordinate, function call or '('",
            pos,
            expected=("NUMBER", "COORD", "FUNC", "(", "-"),
        )


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into an AST; errors carry byte offsets."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return 3
    return 4


def to_text(e: Expr) -> str:
    """Render an AST so that ``parse_expression(to_text(e)) == e``."""
    if isinstance(e, Literal):
        return repr(e.value)
    if isinstance(e, Coord):
        return f"x{e.index}"
    if isinstance(e, Unary):
        inner = to_text(e.arg)
        if e.op == "neg":
            if _prec(e.arg) < 3:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.op}({inner})"
    left = to_text(e.left)
    if _prec(e.left) < _PREC[e.op]:
        left = f"({left})"
    right = to_text(e.right)
    if _prec(e.right) <= _PREC[e.op]:
        right = f"({right})"
    return f"{left}{e.op}{right}"


# ---------------------------------------------------------------------------
# structure queries and transforms


def coordinates(e: Expr) -> frozenset[int]:
    """Set of axis indices the expression references."""
    if isinstance(e, Coord):
        return frozenset((e.index,))
    if isinstance(e, Unary):
        return coordinates(e.arg)
    if isinstance(e, Binary):
        return coordinates(e.left) | coordinates(e.right)
    return frozenset()


def max_coordinate(e: Expr) -> int:
    """Highest referenced axis index, 0 for constant expressions."""
    return max(coordinates(e), default=0)


def shift(e: Expr, offsets: Mapping[int, float]) -> Expr:
    """Substitute x_i -> (x_i - offsets[i]); axes not listed are untouched."""
    if isinstance(e, Coord):
        h = offsets.get(e.index, 0.0)
        if h == 0.0:
            return e
        return Binary("-", e, Literal(h))
    if isinstance(e, Unary):
        return Unary(e.op, shift(e.arg, offsets))
    if isinstance(e, Binary):
        return Binary(e.op, shift(e.left, offsets), shift(e.right, offsets))
    return e


# ---------------------------------------------------------------------------
# evaluation


def eval_point(e: Expr, point: Mapping[int, float]) -> float:
    """Evaluate at a point; missing axes default to 0.0.

    Domain faults return NaN/inf markers rather than raising, so callers
    can decide how to surface them.
    """
    if isinstance(e, Literal):
        return e.value
    if isinstance(e, Coord):
        return float(point.get(e.index, 0.0))
    if isinstance(e, Unary):
        u = eval_point(e.arg, point)
        if e.op == "neg":
            return -u
        if e.op == "abs":
            return abs(u)
        if e.op == "step":
            if math.isnan(u):
                return math.nan
            return 1.0 if u >= 0.0 else 0.0
        if e.op == "log":
            return math.log(u) if u > 0.0 else math.nan
        if e.op == "sqrt":
            return math.sqrt(u) if u >= 0.0 else math.nan
        if e.op == "exp":
            try:
                return math.exp(u)
            except OverflowError:
                return math.inf
        if e.op == "sin":
            return math.sin(u) if math.isfinite(u) else math.nan
        if e.op == "cos":
            return math.cos(u) if math.isfinite(u) else math.nan
        raise ValueError(f"unknown unary op {e.op!r}")
    u = eval_point(e.left, point)
    v = eval_point(e.right, point)
    if e.op == "+":
        return u + v
    if e.op == "-":
        return u - v
    if e.op == "*":
        return u * v
    if e.op == "/":
        if v == 0.0:
            if u == 0.0 or math.isnan(u):
                return math.nan
            return math.copysign(math.inf, u)
        return u / v
    raise ValueError(f"unknown binary op {e.op!r}")


def eval_array(e: Expr, env: Mapping[int, "np.ndarray | float"]):
    """Evaluate over numpy arrays; ``env`` maps axis index to a broadcastable
    array (or scalar). Axes not in ``env`` evaluate as 0.0. Domain faults
    produce NaN/inf entries; callers check finiteness."""
    if isinstance(e, Literal):
        return np.float64(e.value)
    if isinstance(e, Coord):
        v = env.get(e.index)
        return np.float64(0.0) if v is None else v
    if isinstance(e, Unary):
        u = eval_array(e.arg, env)
        if e.op == "neg":
            return -u
        if e.op == "abs":
            return np.abs(u)
        if e.op == "step":
            out = np.where(np.asarray(u) >= 0.0, 1.0, 0.0)
            return np.where(np.isnan(u), np.nan, out)
        with np.errstate(all="ignore"):
            if e.op == "log":
                return np.log(u)
            if e.op == "sqrt":
                return np.sqrt(u)
            if e.op == "exp":
                return np.exp(u)
            if e.op == "sin":
                return np.sin(u)
            if e.op == "cos":
                return np.cos(u)
        raise ValueError(f"unknown unary op {e.op!r}")
    u = eval_array(e.left, env)
    v = eval_array(e.right, env)
    with np.errstate(all="ignore"):
        if e.op == "+":
            return u + v
        if e.op == "-":
            return u - v
        if e.op == "*":
            return u * v
        if e.op == "/":
            return np.divide(u, v)
    raise ValueError(f"unknown binary op {e.op!r}")
