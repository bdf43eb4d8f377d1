"""Coefficient expression language: parsing, vectorized evaluation, differentiation.

Expressions are functions of the single variable ``t``::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := number | "t" | "pi" | "e" | func "(" expr ")" | "(" expr ")"

``^`` binds tighter than unary minus and is right-associative, so ``-t^2`` is
``-(t^2)`` and ``2^3^2`` is ``2^9``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

FUNCTIONS = ("sin", "cos", "tan", "atan", "exp", "ln", "abs", "sqrt", "sign")
CONSTANTS = {"pi": math.pi, "e": math.e}
BINARY_OPS = ("+", "-", "*", "/", "^")


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownIdentifier(ParseError):
    pass


class DomainFault(ExprError):
    """Evaluation left the real domain (division by zero, ln of non-positive, ...)."""

    def __init__(self, message: str, t: float | None = None):
        self.t = t
        where = f" at t={t!r}" if t is not None else ""
        super().__init__(message + where)


class NonDifferentiable(ExprError):
    pass


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = "t"


@dataclass(frozen=True)
class Named:
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a name from FUNCTIONS
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Named, Unary, Binary]


# --------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            offset = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ParseError(f"unexpected character {source[offset]!r}", offset)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ParseError("syntax error", off, (repr(op),))
        self.take()

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, off = self.peek()
        atom_start = ("number", "'t'", "'pi'", "'e'", "function", "'('", "'-'")
        if kind == "num":
            self.take()
            return Const(float(text))
        if kind == "id":
            self.take()
            if text == "t":
                return Var()
            if text in CONSTANTS:
                return Named(text)
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Unary(text, arg)
            raise UnknownIdentifier(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            self.take()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError("syntax error", off, atom_start)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree.

    Raises :class:`ParseError` carrying the byte offset and the expected tokens.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", 0, ("expression",))
    parser = _Parser(source)
    node = parser.expr()
    kind, text, off = parser.peek()
    if kind != "end":
        raise ParseError(f"unexpected token {text!r}", off, ("operator", "end of input"))
    return node


def to_source(e: Expr) -> str:
    """Print ``e`` in a form that parses back to a structurally equal tree."""
    if isinstance(e, Const):
        return repr(float(e.value))
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Named):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-{to_source(e.arg)})"
        return f"{e.op}({to_source(e.arg)})"
    return f"({to_source(e.left)}{e.op}{to_source(e.right)})"


# --------------------------------------------------------------------------
# Evaluation

_UNARY_NUMPY: dict[str, Callable] = {
    "neg": np.negative,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "atan": np.arctan,
    "exp": np.exp,
    "abs": np.abs,
    "sign": np.sign,
}


def _first_t(mask, t):
    idx = np.flatnonzero(np.broadcast_to(mask, np.shape(t)))
    return float(np.ravel(t)[idx[0]]) if idx.size else None


def _build(e: Expr) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(e, Const):
        v = float(e.value)
        return lambda t: v
    if isinstance(e, Var):
        return lambda t: t
    if isinstance(e, Named):
        v = CONSTANTS[e.name]
        return lambda t: v
    if isinstance(e, Unary):
        arg = _build(e.arg)
        if e.op == "ln":
            def ln(t):
                x = arg(t)
                bad = np.less_equal(x, 0)
                if np.any(bad):
                    raise DomainFault("ln of non-positive value", _first_t(bad, t))
                return np.log(x)
            return ln
        if e.op == "sqrt":
            def sqrt(t):
                x = arg(t)
                bad = np.less(x, 0)
                if np.any(bad):
                    raise DomainFault("sqrt of negative value", _first_t(bad, t))
                return np.sqrt(x)
            return sqrt
        fn = _UNARY_NUMPY[e.op]
        return lambda t: fn(arg(t))
    left, right = _build(e.left), _build(e.right)
    if e.op == "+":
        return lambda t: left(t) + right(t)
    if e.op == "-":
        return lambda t: left(t) - right(t)
    if e.op == "*":
        return lambda t: left(t) * right(t)
    if e.op == "/":
        def div(t):
            den = right(t)
            bad = np.equal(den, 0)
            if np.any(bad):
                raise DomainFault("division by zero", _first_t(bad, t))
            return left(t) / den
        return div

    const_int_exponent = (
        isinstance(e.right, Const) and float(e.right.value).is_integer()
    )

    def power(t):
        base, ex = left(t), right(t)
        if not const_int_exponent:
            bad = np.less(base, 0) & ~np.equal(np.floor(ex), ex)
            if np.any(bad):
                raise DomainFault("non-integer power of negative base", _first_t(bad, t))
        bad = np.equal(base, 0) & np.less(ex, 0)
        if np.any(bad):
            raise DomainFault("zero to a negative power", _first_t(bad, t))
        return np.power(base, ex)

    return power


class Compiled:
    """Vectorized evaluator for an expression; immutable and thread-safe."""

    def __init__(self, e: Expr):
        self.expr = e
        self._fn = _build(e)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = np.broadcast_to(np.asarray(self._fn(t_arr), dtype=float), t_arr.shape)
        bad = ~np.isfinite(out)
        if np.any(bad):
            raise DomainFault("non-finite result", _first_t(bad, t_arr))
        if out.ndim == 0:
            return float(out)
        return np.array(out)


def evaluate(e: Expr, t: float) -> float:
    if not math.isfinite(t):
        raise ExprError("t must be finite")
    return float(Compiled(e)(float(t)))


# --------------------------------------------------------------------------
# Differentiation with constant folding

ZERO, ONE = Const(0.0), Const(1.0)


def _is(e: Expr, v: float) -> bool:
    return isinstance(e, Const) and e.value == v


def _fold(op: str, a: float, b: float) -> Const | None:
    try:
        with np.errstate(all="raise"):
            if op == "+":
                r = a + b
            elif op == "-":
                r = a - b
            elif op == "*":
                r = a * b
            elif op == "/":
                r = a / b
            else:
                r = float(np.power(a, b))
    except (ZeroDivisionError, FloatingPointError):
        return None
    return Const(float(r)) if math.isfinite(r) else None


def add(a: Expr, b: Expr) -> Expr:
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold("+", a.value, b.value) or Binary("+", a, b)
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold("-", a.value, b.value) or Binary("-", a, b)
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold("*", a.value, b.value) or Binary("*", a, b)
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold("/", a.value, b.value) or Binary("/", a, b)
    return Binary("/", a, b)


def pow_(a: Expr, b: Expr) -> Expr:
    if _is(b, 1):
        return a
    if _is(b, 0):
        return ONE
    return Binary("^", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def _contains_t(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Unary):
        return _contains_t(e.arg)
    if isinstance(e, Binary):
        return _contains_t(e.left) or _contains_t(e.right)
    return False


def differentiate(e: Expr) -> Expr:
    """Symbolic d/dt. ``abs`` and ``sign`` of a t-dependent argument are rejected."""
    if isinstance(e, (Const, Named)):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Unary):
        u = e.arg
        if not _contains_t(u):
            return ZERO
        du = differentiate(u) if e.op not in ("abs", "sign") else None
        if e.op in ("abs", "sign"):
            raise NonDifferentiable(f"{e.op} is not differentiable")
        if e.op == "neg":
            return neg(du)
        outer = {
            "sin": lambda: Unary("cos", u),
            "cos": lambda: neg(Unary("sin", u)),
            "tan": lambda: add(ONE, pow_(Unary("tan", u), Const(2.0))),
            "atan": lambda: div(ONE, add(ONE, pow_(u, Const(2.0)))),
            "exp": lambda: e,
            "ln": lambda: div(ONE, u),
            "sqrt": lambda: div(ONE, mul(Const(2.0), e)),
        }[e.op]()
        return mul(du, outer)
    a, b = e.left, e.right
    if e.op in "+-":
        da, db = differentiate(a), differentiate(b)
        return add(da, db) if e.op == "+" else sub(da, db)
    if e.op == "*":
        return add(mul(differentiate(a), b), mul(a, differentiate(b)))
    if e.op == "/":
        return div(sub(mul(differentiate(a), b), mul(a, differentiate(b))), pow_(b, Const(2.0)))
    # power
    if not _contains_t(b):
        da = differentiate(a)
        if isinstance(b, Const):
            lowered = pow_(a, Const(b.value - 1.0))
        else:
            lowered = pow_(a, sub(b, ONE))
        return mul(mul(b, lowered), da)
    # u^v = exp(v ln u)
    da, db = differentiate(a), differentiate(b)
    inner = add(mul(db, Unary("ln", a)), div(mul(b, da), a))
    return mul(e, inner)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarField:
    """A coefficient function of t on [t0, oo), given by an expression."""

    expr: Expr
    t0: float
    source: str = ""

    @classmethod
    def from_source(cls, source: str, t0: float) -> "ScalarField":
        return cls(parse(source), float(t0), source)

    @classmethod
    def constant(cls, value: float, t0: float) -> "ScalarField":
        return cls(Const(float(value)), float(t0), repr(float(value)))

    @property
    def compiled(self) -> Compiled:
        # cached on the frozen instance
        c = self.__dict__.get("_compiled")
        if c is None:
            c = Compiled(self.expr)
            object.__setattr__(self, "_compiled", c)
        return c

    def __call__(self, t):
        return self.compiled(t)

    def derivative(self) -> "ScalarField":
        return ScalarField(differentiate(self.expr), self.t0, "")

    def is_constant(self) -> bool:
        return not _contains_t(self.expr)

    def check_domain(self, span: float = 100.0, n: int = 4001) -> None:
        """Dense sampling on [t0, t0 + span]; raises DomainFault on the first bad point."""
        self(np.linspace(self.t0, self.t0 + span, n))

    def __str__(self) -> str:
        return self.source or to_source(self.expr)
