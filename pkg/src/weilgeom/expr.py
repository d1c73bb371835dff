"""Expression trees for smooth real functions on a coordinate chart.

Nodes are immutable and compare structurally.  The operator overloads and the
``add``/``mul``/... builders fold constants; the parser builds nodes verbatim
so that ``parse(to_string(parse(s))) == parse(s)`` holds node for node.

Variables are 0-based internally and print as ``x1 .. xn``.
"""
from __future__ import annotations

import functools
import math
import re
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "Expr", "Const", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Func",
    "PRIMITIVES", "const", "var", "variables", "add", "sub", "mul", "div", "neg",
    "power", "sin", "cos", "exp", "log", "sqrt", "diff", "evaluate", "parse",
    "to_string", "as_expr", "parse_guard",
]

PRIMITIVES = ("sin", "cos", "exp", "log", "sqrt")


class Expr:
    __slots__ = ("_hash",)
    _fields: tuple = ()
    precedence = 5

    def _children_key(self):
        return tuple(getattr(self, f) for f in self._fields)

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._children_key() == other._children_key()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Expr({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    # building
    def __add__(self, other):
        return _op(add, self, other)

    def __radd__(self, other):
        return _op(add, other, self)

    def __sub__(self, other):
        return _op(sub, self, other)

    def __rsub__(self, other):
        return _op(sub, other, self)

    def __mul__(self, other):
        return _op(mul, self, other)

    def __rmul__(self, other):
        return _op(mul, other, self)

    def __truediv__(self, other):
        return _op(div, self, other)

    def __rtruediv__(self, other):
        return _op(div, other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)

    def variables(self) -> frozenset:
        """Indices of the variables the expression depends on."""
        return _variables(self)

    def is_const(self, value=None) -> bool:
        return isinstance(self, Const) and (value is None or self.value == value)


class Const(Expr):
    __slots__ = ("value",)
    _fields = ("value",)

    def __init__(self, value):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"constants must be finite, got {value!r}")
        self.value = value
        self._hash = hash(("const", value))

    @property
    def precedence(self):
        return 0 if self.value < 0 or (self.value == 0 and math.copysign(1, self.value) < 0) else 5


class Var(Expr):
    __slots__ = ("index",)
    _fields = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise ValueError("variable index must be non-negative")
        self.index = int(index)
        self._hash = hash(("var", self.index))


class Neg(Expr):
    __slots__ = ("arg",)
    _fields = ("arg",)
    precedence = 3

    def __init__(self, arg: Expr):
        self.arg = arg
        self._hash = hash(("neg", arg._hash))


class _Binary(Expr):
    __slots__ = ("left", "right")
    _fields = ("left", "right")
    symbol = "?"

    def __init__(self, left: Expr, right: Expr):
        self.left = left
        self.right = right
        self._hash = hash((self.symbol, left._hash, right._hash))


class Add(_Binary):
    __slots__ = ()
    symbol = "+"
    precedence = 1


class Sub(_Binary):
    __slots__ = ()
    symbol = "-"
    precedence = 1


class Mul(_Binary):
    __slots__ = ()
    symbol = "*"
    precedence = 2


class Div(_Binary):
    __slots__ = ()
    symbol = "/"
    precedence = 2


class Pow(Expr):
    __slots__ = ("base", "exponent")
    _fields = ("base", "exponent")
    precedence = 4

    def __init__(self, base: Expr, exponent: int):
        if not isinstance(exponent, (int, np.integer)) or isinstance(exponent, bool):
            raise TypeError("only integer exponents are supported")
        self.base = base
        self.exponent = int(exponent)
        self._hash = hash(("^", base._hash, self.exponent))


class Func(Expr):
    __slots__ = ("name", "arg")
    _fields = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name not in PRIMITIVES:
            raise ValueError(f"unknown primitive {name!r}")
        self.name = name
        self.arg = arg
        self._hash = hash((name, arg._hash))


@functools.lru_cache(maxsize=1 << 16)
def _variables(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.index,))
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, _Binary):
        return _variables(e.left) | _variables(e.right)
    if isinstance(e, Pow):
        return _variables(e.base)
    return _variables(e.arg)


# -- folding builders -----------------------------------------------------

def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, np.number)) and not isinstance(x, bool):
        return Const(x)
    raise TypeError(f"cannot interpret {x!r} as an expression")


def _op(fn, a, b):
    if not all(isinstance(x, (Expr, int, float, np.number)) and not isinstance(x, bool) for x in (a, b)):
        return NotImplemented
    return fn(a, b)


def const(value) -> Const:
    return Const(value)


def var(index: int) -> Var:
    return Var(index)


def variables(n: int) -> tuple[Var, ...]:
    return tuple(Var(i) for i in range(n))


def add(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const(0.0):
        return b
    if b.is_const(0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def sub(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if b.is_const(0.0):
        return a
    if a.is_const(0.0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def neg(a) -> Expr:
    a = as_expr(a)
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const(0.0) or b.is_const(0.0):
        return Const(0.0)
    if a.is_const(1.0):
        return b
    if b.is_const(1.0):
        return a
    if a.is_const(-1.0):
        return neg(b)
    if b.is_const(-1.0):
        return neg(a)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Mul(a, b)


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if b.is_const(0.0):
        raise DomainError("division by the constant zero")
    if a.is_const(0.0):
        return Const(0.0)
    if b.is_const(1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    return Div(a, b)


def power(a, n: int) -> Expr:
    a = as_expr(a)
    if n == 0:
        return Const(1.0)
    if n == 1:
        return a
    if isinstance(a, Const) and (a.value != 0 or n > 0):
        return Const(a.value ** n)
    return Pow(a, n)


def _func(name):
    def build(a) -> Expr:
        return Func(name, as_expr(a))
    build.__name__ = name
    return build


sin = _func("sin")
cos = _func("cos")
exp = _func("exp")
log = _func("log")
sqrt = _func("sqrt")


# -- differentiation ------------------------------------------------------

@functools.lru_cache(maxsize=1 << 16)
def diff(f: Expr, i: int) -> Expr:
    """Symbolic partial derivative with respect to variable ``i`` (0-based)."""
    if i not in _variables(f):
        return Const(0.0)
    if isinstance(f, Var):
        return Const(1.0)
    if isinstance(f, Neg):
        return neg(diff(f.arg, i))
    if isinstance(f, Add):
        return add(diff(f.left, i), diff(f.right, i))
    if isinstance(f, Sub):
        return sub(diff(f.left, i), diff(f.right, i))
    if isinstance(f, Mul):
        return add(mul(diff(f.left, i), f.right), mul(f.left, diff(f.right, i)))
    if isinstance(f, Div):
        da, db = diff(f.left, i), diff(f.right, i)
        return sub(div(da, f.right), div(mul(f.left, db), power(f.right, 2)))
    if isinstance(f, Pow):
        n = f.exponent
        return mul(mul(Const(n), power(f.base, n - 1)), diff(f.base, i))
    if isinstance(f, Func):
        u, du = f.arg, diff(f.arg, i)
        if f.name == "sin":
            outer = cos(u)
        elif f.name == "cos":
            outer = neg(sin(u))
        elif f.name == "exp":
            outer = f
        elif f.name == "log":
            return div(du, u)
        else:  # sqrt
            return div(du, mul(Const(2.0), f))
        return mul(outer, du)
    raise TypeError(f"unexpected node {type(f).__name__}")


# -- evaluation -----------------------------------------------------------

def interpret(f: Expr, leaf, ops, cache: dict | None = None):
    """Fold ``f`` bottom-up with ``ops`` (const/neg/add/sub/mul/div/pow/func)."""
    if cache is None:
        cache = {}

    def walk(e):
        hit = cache.get(e)
        if hit is not None:
            return hit
        if isinstance(e, Const):
            v = ops.const(e.value)
        elif isinstance(e, Var):
            v = leaf(e.index)
        elif isinstance(e, Neg):
            v = ops.neg(walk(e.arg))
        elif isinstance(e, Add):
            v = ops.add(walk(e.left), walk(e.right))
        elif isinstance(e, Sub):
            v = ops.sub(walk(e.left), walk(e.right))
        elif isinstance(e, Mul):
            v = ops.mul(walk(e.left), walk(e.right))
        elif isinstance(e, Div):
            v = ops.div(walk(e.left), walk(e.right))
        elif isinstance(e, Pow):
            v = ops.pow(walk(e.base), e.exponent)
        else:
            v = ops.func(e.name, walk(e.arg))
        cache[e] = v
        return v

    return walk(f)


class _RealOps:
    @staticmethod
    def const(c):
        return c

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def div(a, b):
        if np.any(np.asarray(b) == 0):
            raise DomainError("division by zero")
        return a / b

    @staticmethod
    def pow(a, n):
        if n < 0 and np.any(np.asarray(a) == 0):
            raise DomainError("negative power of zero")
        return a ** n if n >= 0 else 1.0 / a ** (-n)

    @staticmethod
    def func(name, a):
        if name == "log" and np.any(np.asarray(a) <= 0):
            raise DomainError("log of a non-positive argument")
        if name == "sqrt" and np.any(np.asarray(a) < 0):
            raise DomainError("sqrt of a negative argument")
        return getattr(np, name)(a)


def evaluate(f: Expr, point: Sequence, cache: dict | None = None):
    """Real value of ``f`` at ``point``; coordinates may be numpy arrays."""
    f = as_expr(f)
    point = [np.asarray(p, dtype=float) if not isinstance(p, float) else p for p in point]

    def leaf(i):
        if i >= len(point):
            raise IndexError(f"variable x{i + 1} is outside a {len(point)}-dimensional point")
        return point[i]

    out = interpret(f, leaf, _RealOps, cache)
    return out if not isinstance(out, np.ndarray) or out.ndim else float(out)


# -- printing -------------------------------------------------------------

def to_string(f: Expr) -> str:
    """Infix rendering that parses back to the same tree."""
    if isinstance(f, Const):
        return repr(f.value)
    if isinstance(f, Var):
        return f"x{f.index + 1}"
    if isinstance(f, Func):
        return f"{f.name}({to_string(f.arg)})"
    if isinstance(f, Neg):
        a = f.arg
        inner = to_string(a)
        if isinstance(a, Const) or a.precedence < 3:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(f, Pow):
        b = to_string(f.base)
        if f.base.precedence < 5:
            b = f"({b})"
        return f"{b}^{f.exponent}"
    lp = rp = f.precedence
    left = to_string(f.left)
    right = to_string(f.right)
    if f.left.precedence < lp:
        left = f"({left})"
    if f.right.precedence <= rp:
        right = f"({right})"
    return f"{left}{f.symbol}{right}"


_TOKEN = re.compile(r"""
    \s*(?:
      (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<var>x(?P<vidx>\d+))\b
    | (?P<name>[A-Za-z_]\w*)
    | (?P<op>[-+*/^()])
    )""", re.VERBOSE)


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected character {text[pos:].strip()[:1]!r} at column {pos + 1}")
        if m.group("num") is not None:
            out.append(("num", m.group("num"), m.start("num")))
        elif m.group("var") is not None:
            out.append(("var", int(m.group("vidx")), m.start("var")))
        elif m.group("name") is not None:
            out.append(("name", m.group("name"), m.start("name")))
        else:
            out.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg):
        col = self.peek()[2] + 1
        return ValueError(f"{msg} at column {col} in {self.text!r}")

    def expect(self, op):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            self.i -= 1
            raise self.error(f"expected {op!r}")

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error("trailing input")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            r = self.term()
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            r = self.unary()
            e = Mul(e, r) if op == "*" else Div(e, r)
        return e

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            nxt, after = self.peek(1), self.peek(2)
            if nxt[0] == "num" and not (after[0] == "op" and after[1] == "^"):
                self.i += 2
                return Const(-float(nxt[1]))
            self.take()
            return Neg(self.unary())
        return self.pow()

    def pow(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "op" and self.peek()[1] == "-":
                self.take()
                sign = -1
            t = self.take()
            if t[0] != "num" or not t[1].isdigit():
                self.i -= 1
                raise self.error("expected an integer exponent")
            return Pow(base, sign * int(t[1]))
        return base

    def atom(self):
        t = self.take()
        if t[0] == "num":
            return Const(float(t[1]))
        if t[0] == "var":
            if t[1] < 1:
                self.i -= 1
                raise self.error("variables are numbered from x1")
            return Var(t[1] - 1)
        if t[0] == "name":
            if t[1] not in PRIMITIVES:
                self.i -= 1
                raise self.error(f"unknown function {t[1]!r}")
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Func(t[1], arg)
        if t[0] == "op" and t[1] == "(":
            e = self.expr()
            self.expect(")")
            return e
        self.i -= 1
        raise self.error("unexpected token")


def parse(text: str) -> Expr:
    """Parse infix text: + - * /, integer powers via ^, sin/cos/exp/log/sqrt, x1..xn."""
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text).parse()


_COMPARISON = re.compile(r"(.+?)(>=|<=|>|<)(.+)")


def parse_guard(text: str) -> tuple[Expr, ...]:
    """Parse ``a > b and c < d`` into expressions that must be strictly positive.

    Non-strict comparisons are accepted and treated as strict, since chart
    domains are open sets.
    """
    parts = re.split(r"\band\b|&&|&", text)
    out = []
    for p in parts:
        m = _COMPARISON.fullmatch(p.strip())
        if not m:
            raise ValueError(f"cannot read domain condition {p.strip()!r}")
        lhs, cmp, rhs = parse(m.group(1)), m.group(2), parse(m.group(3))
        out.append(sub(lhs, rhs) if cmp.startswith(">") else sub(rhs, lhs))
    return tuple(out)
