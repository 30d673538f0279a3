"""Parser and evaluator for one-variable real expressions.

Grammar (precedence high to low)::

    atom    := number | name | name '(' expr ')' | '(' expr ')'
    power   := atom ('^' unary)?          # right associative
    unary   := '-' unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*

Known functions are exp, ln, sin, cos, abs and sqrt; ``pi`` and ``e`` are
constants. Any other bare name is the free variable, and exactly one such
name may appear.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from typing import Callable, Union

from .errors import DomainError, ExprError, ExprSyntaxError

FUNCTIONS = ("exp", "ln", "sin", "cos", "abs", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}
BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Named:
    """A named constant such as ``pi``; kept symbolic so printing round-trips."""

    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or one of FUNCTIONS
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Named, Unary, Binary]


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables: set[str] = set()

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, offset = self.peek()
        if value != text or kind != "op":
            what = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {what}", offset)
        self.take()

    def parse(self) -> Node:
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {value!r}", offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, value, offset = self.take()
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                if value not in FUNCTIONS:
                    raise ExprError(f"unknown function {value!r} at offset {offset}")
                self.take()
                arg = self.expr()
                self.expect(")")
                return Unary(value, arg)
            if value in FUNCTIONS:
                raise ExprSyntaxError(f"function {value!r} needs an argument", offset + len(value))
            if value in CONSTANTS:
                return Named(value)
            self.variables.add(value)
            return Var(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {what}", offset)


@dataclass(frozen=True)
class Expression:
    """Parsed expression; immutable and safe to share between threads."""

    ast: Node
    source_text: str
    variable: str = "y"
    _compiled: Callable[[float], float] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self._compiled is None:
            object.__setattr__(self, "_compiled", _compile(self.ast))

    def __call__(self, y: float) -> float:
        v = self._compiled(y)
        if not math.isfinite(v):
            raise DomainError(f"{self.source_text} has no finite value at {y!r}")
        return v

    def __getstate__(self):
        return {"ast": self.ast, "source_text": self.source_text, "variable": self.variable}

    def __setstate__(self, state):
        for k, v in state.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "_compiled", _compile(self.ast))

    def __str__(self):
        return to_source(self.ast)


def parse(source: str) -> Expression:
    """Parse ``source`` into an :class:`Expression`.

    Raises ExprSyntaxError (carrying the byte offset) on malformed input and
    ExprError for unknown functions or more than one free variable.
    """
    p = _Parser(source)
    ast = p.parse()
    if len(p.variables) > 1:
        raise ExprError(f"multiple free variables: {', '.join(sorted(p.variables))}")
    if not p.variables:
        raise ExprError("expression has no free variable")
    return Expression(ast, source, next(iter(p.variables)))


def to_source(node: Node) -> str:
    """Render with full parenthesization; ``parse(to_source(a)).ast == a``."""
    if isinstance(node, Const):
        if node.value < 0 or not math.isfinite(node.value):
            raise ExprError(f"constant {node.value!r} has no source form")
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Named):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{to_source(node.arg)})"
        return f"{node.op}({to_source(node.arg)})"
    return f"({to_source(node.left)} {node.op} {to_source(node.right)})"


def _domain_fail(node: Node, msg: str):
    raise DomainError(f"{msg} in {to_source(node)}")


def _compile(node: Node) -> Callable[[float], float]:
    # Closures instead of a tree walk per call: the solver evaluates f thousands of times.
    if isinstance(node, Const):
        c = node.value
        return lambda y: c
    if isinstance(node, Named):
        c = CONSTANTS[node.name]
        return lambda y: c
    if isinstance(node, Var):
        return lambda y: y
    if isinstance(node, Unary):
        arg = _compile(node.arg)
        return _compile_unary(node, arg)
    left, right = _compile(node.left), _compile(node.right)
    op = node.op
    if op == "+":
        return lambda y: left(y) + right(y)
    if op == "-":
        return lambda y: left(y) - right(y)
    if op == "*":
        return lambda y: left(y) * right(y)
    if op == "/":
        def div(y):
            d = right(y)
            if d == 0.0:
                _domain_fail(node, "division by zero")
            return left(y) / d
        return div

    def power(y):
        base, ex = left(y), right(y)
        try:
            r = base ** ex
        except (ZeroDivisionError, OverflowError) as exc:
            _domain_fail(node, f"invalid power ({exc})")
        if isinstance(r, complex) or not math.isfinite(r):
            _domain_fail(node, "power has no finite real value")
        return r
    return power


def _compile_unary(node: Unary, arg):
    op = node.op
    if op == "neg":
        return lambda y: -arg(y)
    if op == "abs":
        return lambda y: abs(arg(y))
    if op == "sin":
        return lambda y: math.sin(arg(y))
    if op == "cos":
        return lambda y: math.cos(arg(y))
    if op == "exp":
        def exp(y):
            try:
                return math.exp(arg(y))
            except OverflowError:
                _domain_fail(node, "overflow")
        return exp
    if op == "ln":
        def ln(y):
            v = arg(y)
            if v <= 0.0:
                _domain_fail(node, f"logarithm of nonpositive value {v!r}")
            return math.log(v)
        return ln
    if op == "sqrt":
        def sqrt(y):
            v = arg(y)
            if v < 0.0:
                _domain_fail(node, f"square root of negative value {v!r}")
            return math.sqrt(v)
        return sqrt
    raise ExprError(f"unknown operator {op!r}")


def evaluate(e: Expression, y: float) -> float:
    return e(float(y))


def central_difference(fn: Callable[[float], float], y: float, order: int = 1) -> float:
    """Central finite difference of ``fn`` at ``y``.

    The step balances truncation against rounding: cbrt(eps) for the first
    derivative and eps**(1/4) for the second, both scaled by max(1, |y|).
    """
    eps = sys.float_info.epsilon
    scale = max(1.0, abs(y))
    if order == 1:
        h = eps ** (1 / 3) * scale
        # Representable step so (y+h)-(y-h) is exactly 2h.
        h = (y + h) - y
        return (fn(y + h) - fn(y - h)) / (2 * h)
    if order == 2:
        h = eps ** 0.25 * scale
        h = (y + h) - y
        return (fn(y + h) - 2 * fn(y) + fn(y - h)) / (h * h)
    raise ValueError(f"order must be 1 or 2, got {order}")


def differentiate_numeric(e: Expression, y: float, order: int = 1) -> float:
    return central_difference(e, float(y), order)
