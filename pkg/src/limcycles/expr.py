"""Expression language for vector-field components.

Grammar (see ``docs/grammar.md`` for the EBNF)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' INTEGER)*
    atom   := NUMBER | 'x' | 'y' | FUNC '(' expr ')' | '(' expr ')'

Expressions are immutable trees. Each node compiles lazily to a plain
Python function for scalar evaluation and to a numpy function for
vectorised evaluation over grids.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "ParseError",
    "UnknownIdentifierError",
    "parse",
    "differentiate",
    "evaluate",
    "const",
    "VARIABLES",
    "FUNCTIONS",
]

VARIABLES = ("x", "y")
FUNCTIONS = ("sin", "cos", "exp")

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


class ParseError(ValueError):
    """Syntax error at a byte offset of the input text."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ParseError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Expr:
    _scalar: Callable | None = field(default=None, init=False, repr=False, compare=False)
    _vector: Callable | None = field(default=None, init=False, repr=False, compare=False)

    # subclasses implement: _py(), _np(), _str(), variables()

    def __call__(self, x: float = 0.0, y: float = 0.0) -> float:
        return self.eval(x, y)

    def eval(self, x: float, y: float = 0.0) -> float:
        """Evaluate at a point.  Non-finite results are returned as-is."""
        fn = self._scalar
        if fn is None:
            fn = _compile(f"lambda x, y: {self._py()}", _SCALAR_NS)
            object.__setattr__(self, "_scalar", fn)
        try:
            return fn(float(x), float(y))
        except (ZeroDivisionError, OverflowError, ValueError):
            with np.errstate(all="ignore"):
                return float(self.eval_array(np.float64(x), np.float64(y)))

    def eval_array(self, x, y=0.0) -> np.ndarray:
        """Vectorised evaluation with numpy broadcasting."""
        fn = self._vector
        if fn is None:
            fn = _compile(f"lambda x, y: {self._np()}", _NUMPY_NS)
            object.__setattr__(self, "_vector", fn)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            out = fn(x, y)
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(x, y).shape).copy()

    def __str__(self) -> str:
        return self._str(0)

    def depends_on(self, var: str) -> bool:
        return var in self.variables()

    @property
    def is_constant(self) -> bool:
        return not self.variables()


@dataclass(frozen=True)
class Num(Expr):
    value: float = 0.0

    def _py(self):
        v = float(self.value)
        if math.isfinite(v):
            return f"({v!r})" if math.copysign(1.0, v) < 0 else repr(v)
        return "_nan" if math.isnan(v) else ("_inf" if v > 0 else "(-_inf)")

    def _np(self):
        # numpy scalars keep IEEE semantics when a subtree is all constants
        return f"_f64({self._py()})"

    def _str(self, prec):
        if self.value < 0:
            return f"({_fmt(self.value)})"
        return _fmt(self.value)

    def variables(self):
        return frozenset()


@dataclass(frozen=True)
class Var(Expr):
    name: str = "x"

    def _py(self):
        return self.name

    _np = _py

    def _str(self, prec):
        return self.name

    def variables(self):
        return frozenset({self.name})


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr = None

    def _py(self):
        return f"(-{self.arg._py()})"

    def _np(self):
        return f"(-{self.arg._np()})"

    def _str(self, prec):
        s = f"-{self.arg._str(3)}"
        return f"({s})" if prec > 2 else s

    def variables(self):
        return self.arg.variables()


@dataclass(frozen=True)
class BinOp(Expr):
    op: str = "+"
    left: Expr = None
    right: Expr = None

    def _py(self):
        return f"({self.left._py()} {self.op} {self.right._py()})"

    def _np(self):
        return f"({self.left._np()} {self.op} {self.right._np()})"

    def _str(self, prec):
        p = _PREC[self.op]
        # right operand binds one level tighter to keep left associativity
        s = f"{self.left._str(p)} {self.op} {self.right._str(p + 1)}"
        return f"({s})" if prec > p else s

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr = None
    n: int = 1

    def _py(self):
        b = self.base._py()
        if self.n == 0:
            return "1.0"
        if self.n <= 3:
            return "(" + " * ".join([b] * self.n) + ")"
        return f"({b} ** {self.n})"

    def _np(self):
        return f"({self.base._np()} ** {self.n})"

    def _str(self, prec):
        s = f"{self.base._str(4)}^{self.n}"
        return f"({s})" if prec > 4 else s

    def variables(self):
        return self.base.variables()


@dataclass(frozen=True)
class Call(Expr):
    func: str = "sin"
    arg: Expr = None

    def _py(self):
        return f"_m_{self.func}({self.arg._py()})"

    def _np(self):
        return f"_np_{self.func}({self.arg._np()})"

    def _str(self, prec):
        return f"{self.func}({self.arg._str(0)})"

    def variables(self):
        return self.arg.variables()


def _fmt(v: float) -> str:
    if not math.isfinite(v):
        return repr(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


_SPECIAL = {"_inf": math.inf, "_nan": math.nan, "__builtins__": {}}
_SCALAR_NS = {"_m_sin": math.sin, "_m_cos": math.cos, "_m_exp": math.exp, **_SPECIAL}
_NUMPY_NS = {"_f64": np.float64, "_np_sin": np.sin, "_np_cos": np.cos, "_np_exp": np.exp, **_SPECIAL}


def _compile(src: str, ns: dict) -> Callable:
    return eval(compile(src, "<expr>", "eval"), dict(ns))


def evaluate(e: Expr, x: float, y: float = 0.0) -> float:
    return e.eval(x, y)


# ---------------------------------------------------------------------------
# constructors with constant folding

ZERO = Num(0.0)
ONE = Num(1.0)


def const(v: float) -> Num:
    return Num(float(v))


def _is(e: Expr, v: float) -> bool:
    return isinstance(e, Num) and e.value == v


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(b, Neg):
        return BinOp("-", a, b.arg)
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return neg(b)
    if _is(b, -1):
        return neg(a)
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    if _is(b, 1):
        return a
    if _is(a, 0) and not _is(b, 0):
        return ZERO
    return BinOp("/", a, b)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Num):
        return Num(a.value ** n)
    return Pow(a, n)


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e: Expr, var: str) -> Expr:
    """Exact derivative of ``e`` with respect to ``var`` ('x' or 'y')."""
    if var not in VARIABLES:
        raise ValueError(f"unknown variable {var!r}")
    return _d(e, var)


def _d(e: Expr, v: str) -> Expr:
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Neg):
        return neg(_d(e.arg, v))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        da, db = _d(a, v), _d(b, v)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, b), mul(a, db))
        # quotient rule
        if _is(db, 0):
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    if isinstance(e, Pow):
        if e.n == 0:
            return ZERO
        db = _d(e.base, v)
        return mul(mul(Num(float(e.n)), power(e.base, e.n - 1)), db)
    if isinstance(e, Call):
        da = _d(e.arg, v)
        if _is(da, 0):
            return ZERO
        if e.func == "sin":
            outer = Call("cos", e.arg)
        elif e.func == "cos":
            outer = neg(Call("sin", e.arg))
        else:
            outer = e
        return mul(outer, da)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: str):
        kind, val, off = self.peek()
        got = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"expected {expected}, got {got}", off, self.text)

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail("operator or end of input")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        e = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, val, off = self.peek()
            if kind != "num" or not val.isdigit():
                self.fail("nonnegative integer exponent")
            self.take()
            e = Pow(e, int(val))
        return e

    def atom(self):
        kind, val, off = self.peek()
        if kind == "num":
            self.take()
            return Num(float(val))
        if kind == "name":
            self.take()
            if val in VARIABLES:
                return Var(val)
            if val in FUNCTIONS:
                if self.peek()[1] != "(":
                    self.fail("'(' after function name")
                self.take()
                arg = self.expr()
                if self.peek()[1] != ")":
                    self.fail("')'")
                self.take()
                return Call(val, arg)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", off, self.text)
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            if self.peek()[1] != ")":
                self.fail("')'")
            self.take()
            return e
        self.fail("number, variable, function or '('")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ParseError` (with ``offset``) on malformed input and
    :class:`UnknownIdentifierError` for names other than x, y, sin, cos, exp.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0, text or "")
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# polynomial view (used for exact antiderivatives and asymptotics)


def poly_coeffs(e: Expr, var: str = "x") -> np.ndarray | None:
    """Ascending coefficients if ``e`` is a polynomial in ``var`` alone, else None."""
    other = {"x": "y", "y": "x"}[var]
    if e.depends_on(other):
        return None
    c = _poly(e, var)
    if c is None:
        return None
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    return c if c.size else np.zeros(1)


def _poly(e, v):
    if isinstance(e, Num):
        return np.array([e.value])
    if isinstance(e, Var):
        return np.array([0.0, 1.0])
    if isinstance(e, Neg):
        c = _poly(e.arg, v)
        return None if c is None else -c
    if isinstance(e, Pow):
        c = _poly(e.base, v)
        if c is None:
            return None
        out = np.array([1.0])
        for _ in range(e.n):
            out = np.polynomial.polynomial.polymul(out, c)
        return out
    if isinstance(e, BinOp):
        a, b = _poly(e.left, v), _poly(e.right, v)
        if a is None or b is None:
            return None
        if e.op == "+":
            return np.polynomial.polynomial.polyadd(a, b)
        if e.op == "-":
            return np.polynomial.polynomial.polysub(a, b)
        if e.op == "*":
            return np.polynomial.polynomial.polymul(a, b)
        b = np.trim_zeros(b, "b")
        if b.size == 1 and b[0] != 0:
            return a / b[0]
        return None
    return None


def from_coeffs(c, var: str = "x") -> Expr:
    """Build an expression from ascending polynomial coefficients."""
    v = Var(var)
    out: Expr = ZERO
    for k, ck in enumerate(c):
        if ck == 0:
            continue
        out = add(out, mul(Num(float(ck)), power(v, k)))
    return out
