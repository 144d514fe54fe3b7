"""Symbolic scalar expressions over chart coordinates.

Expressions are immutable, hash-consed trees: structurally equal trees are
the same object, so equality and hashing are O(1) and derivative trees share
subexpressions freely.  Tensor algebra never happens here; only scalar
component expressions are parsed, differentiated and evaluated.

Grammar accepted by :func:`parse_expr`::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?            # right associative, -x^2 == -(x^2)
    atom   := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := sin | cos | exp | log | sqrt

Exponents must fold to a constant.
"""

from __future__ import annotations

import math
import re
import weakref
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Expr",
    "ExprError",
    "ParseError",
    "DomainError",
    "const",
    "symbol",
    "parse_expr",
    "diff_expr",
    "derivative",
    "eval_expr",
    "eval_many",
    "to_string",
    "free_symbols",
    "fd_derivative",
    "fd_check",
    "fd_tolerance",
    "FD_STEPS",
]

UNARY_FUNCS = ("sin", "cos", "exp", "log", "sqrt")
FD_STEPS = {1: 1e-3, 2: 1e-3, 3: 1e-2}


class ExprError(Exception):
    """Base class for expression failures."""


class ParseError(ExprError, ValueError):
    """Malformed source string, unknown identifier or non-constant exponent."""

    def __init__(self, message: str, position: int | None = None, source: str | None = None):
        self.position = position
        self.source = source
        if position is not None:
            message = f"{message} (at position {position})"
            if source is not None:
                message += f"\n  {source}\n  {' ' * position}^"
        super().__init__(message)


class DomainError(ExprError, ArithmeticError):
    """Evaluation left the real domain (log of non-positive, division by zero, ...)."""

    def __init__(self, message: str, point=None):
        self.point = None if point is None else tuple(float(v) for v in np.ravel(point))
        if self.point is not None:
            message = f"{message} at point {self.point}"
        super().__init__(message)


_INTERN: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()


class Expr:
    """Interned expression node.

    ``op`` is one of ``const``, ``sym``, ``neg``, the unary functions, ``add``,
    ``sub``, ``mul``, ``div`` or ``pow``.  Constants keep their float in
    ``value``; symbols keep ``(name, index)`` where ``index`` is the position of
    the coordinate in the owning chart.  Build nodes through the module-level
    factories or Python operators, never through the constructor.
    """

    __slots__ = ("op", "args", "value", "_hash", "__weakref__")

    def __init__(self, op, args, value, key):
        self.op = op
        self.args = args
        self.value = value
        self._hash = hash(key)

    def __setattr__(self, name, val):
        if hasattr(self, "_hash"):
            raise AttributeError("Expr is immutable")
        object.__setattr__(self, name, val)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        # interning makes structural equality identity
        return self is other

    def __ne__(self, other):
        return self is not other

    def __reduce__(self):
        return (parse_expr_bound, (to_string(self), _symbol_table(self)))

    def __repr__(self):
        return f"Expr({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, other):
        return power(self, _coerce(other))

    def __neg__(self):
        return neg(self)


def _make(op: str, args: tuple = (), value=None) -> Expr:
    key = (op, value, tuple(id(a) for a in args))
    node = _INTERN.get(key)
    # ids are only meaningful while the children are alive; confirm identity
    if node is not None and all(x is y for x, y in zip(node.args, args)):
        return node
    node = Expr(op, args, value, (op, value, tuple(a._hash for a in args)))
    _INTERN[key] = node
    return node


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(x)


def const(value: float) -> Expr:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite constant {value!r}")
    if value == 0.0:
        value = 0.0  # collapse -0.0
    return _make("const", (), value)


def symbol(name: str, index: int) -> Expr:
    return _make("sym", (), (name, int(index)))


ZERO = const(0.0)
ONE = const(1.0)


def _fold(op: str, *vals: float) -> float | None:
    try:
        with np.errstate(all="raise"):
            out = float(_NUMPY_OPS[op](*(np.float64(v) for v in vals)))
    except (FloatingPointError, ZeroDivisionError, ValueError, OverflowError):
        return None
    return out if math.isfinite(out) else None


def neg(a: Expr) -> Expr:
    if a.op == "const":
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return _make("neg", (a,))


def add(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return const(a.value + b.value)
    if a is ZERO:
        return b
    if b is ZERO:
        return a
    return _make("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return const(a.value - b.value)
    if b is ZERO:
        return a
    if a is ZERO:
        return neg(b)
    return _make("sub", (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return const(a.value * b.value)
    if a is ZERO or b is ZERO:
        return ZERO
    if a is ONE:
        return b
    if b is ONE:
        return a
    return _make("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const" and b.value != 0.0:
        return const(a.value / b.value)
    if b is ONE:
        return a
    if a is ZERO and b.op != "const":
        return ZERO
    return _make("div", (a, b))


def power(a: Expr, b: Expr) -> Expr:
    if b.op != "const":
        raise ParseError("exponent must be a constant expression")
    if b is ONE:
        return a
    if b is ZERO:
        return ONE
    if a.op == "const":
        folded = _fold("pow", a.value, b.value)
        if folded is not None:
            return const(folded)
    return _make("pow", (a, b))


def func(name: str, a: Expr) -> Expr:
    if name not in UNARY_FUNCS:
        raise ValueError(f"unknown function {name!r}")
    if a.op == "const":
        folded = _fold(name, a.value)
        if folded is not None:
            return const(folded)
    return _make(name, (a,))


_NUMPY_OPS = {
    "neg": np.negative,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": np.divide,
    "pow": np.power,
}


# ----------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    pos = 0
    tokens = []
    n = len(src)
    while pos < n:
        if src[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            skip = len(src[pos:]) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[pos + skip]!r}", pos + skip, src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, coords: Sequence[str]):
        self.src = src
        self.coords = {name: i for i, name in enumerate(coords)}
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos, self.src)

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", pos, self.src)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            pos = self.take()[2]
            exponent = self.unary()
            if exponent.op != "const":
                raise ParseError("'^' requires a constant exponent", pos, self.src)
            return power(base, exponent)
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.take()
        if kind == "num":
            return const(float(text))
        if kind == "ident":
            if text in UNARY_FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return func(text, arg)
            if text not in self.coords:
                raise ParseError(f"unknown identifier {text!r}", pos, self.src)
            if self.peek()[1] == "(":
                raise ParseError(f"{text!r} is not a function", self.peek()[2], self.src)
            return symbol(text, self.coords[text])
        if text == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", pos, self.src)


def parse_expr(src: str, coords: Sequence[str]) -> Expr:
    """Parse ``src`` into an expression over the coordinates ``coords``.

    >>> to_string(parse_expr("x^2 + y", ["x", "y"]))
    'x^2 + y'
    """
    if not isinstance(src, str) or not src.strip():
        raise ParseError("empty expression", 0, src if isinstance(src, str) else None)
    if len(set(coords)) != len(coords):
        raise ValueError(f"duplicate coordinate names in {list(coords)}")
    for name in coords:
        if name in UNARY_FUNCS or not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            raise ValueError(f"invalid coordinate name {name!r}")
    return _Parser(src, coords).parse()


def _symbol_table(e: Expr) -> list[str]:
    syms = free_symbols(e)
    width = max((i for _, i in syms), default=-1) + 1
    table = [f"_unused{i}" for i in range(width)]
    for name, i in syms:
        table[i] = name
    return table


def parse_expr_bound(src: str, coords: Sequence[str]) -> Expr:
    return parse_expr(src, coords)


# ----------------------------------------------------------------------------
# printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


def _fmt_const(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_string(e: Expr) -> str:
    """Render ``e`` in the parser's grammar; ``parse_expr`` round-trips it."""
    return _render(e)[0]


def _render(e: Expr) -> tuple[str, int]:
    op = e.op
    if op == "const":
        s = _fmt_const(e.value)
        return (s, 3) if e.value < 0 else (s, 5)
    if op == "sym":
        return e.value[0], 5
    if op in UNARY_FUNCS:
        return f"{op}({_render(e.args[0])[0]})", 5
    if op == "neg":
        inner, p = _render(e.args[0])
        if p < 4:
            inner = f"({inner})"
        return f"-{inner}", 3
    a, pa = _render(e.args[0])
    b, pb = _render(e.args[1])
    prec = _PREC[op]
    if op == "pow":
        if pa <= prec:
            a = f"({a})"
        if pb < 5:
            b = f"({b})"
        return f"{a}^{b}", prec
    if pa < prec:
        a = f"({a})"
    # left associative: a right operand of equal precedence keeps its parentheses
    # so that the reparsed tree is the same tree, not just an equal value
    if pb <= prec or pb == 3:
        b = f"({b})"
    return f"{a} {_SYMBOL[op]} {b}", prec


def free_symbols(e: Expr) -> set[tuple[str, int]]:
    out: set[tuple[str, int]] = set()
    seen: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node.op == "sym":
            out.add(node.value)
        stack.extend(node.args)
    return out


# ----------------------------------------------------------------------------
# differentiation

def _resolve_index(e: Expr, coord) -> int:
    if isinstance(coord, (int, np.integer)):
        return int(coord)
    for name, i in free_symbols(e):
        if name == coord:
            return i
    return -1  # a name the expression never mentions: derivative is zero


@lru_cache(maxsize=None)
def _diff(e: Expr, k: int) -> Expr:
    op = e.op
    if op == "const":
        return ZERO
    if op == "sym":
        return ONE if e.value[1] == k else ZERO
    if op == "neg":
        return neg(_diff(e.args[0], k))
    if op == "add":
        return add(_diff(e.args[0], k), _diff(e.args[1], k))
    if op == "sub":
        return sub(_diff(e.args[0], k), _diff(e.args[1], k))
    if op == "mul":
        a, b = e.args
        return add(mul(_diff(a, k), b), mul(a, _diff(b, k)))
    if op == "div":
        a, b = e.args
        da, db = _diff(a, k), _diff(b, k)
        if db is ZERO:
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, const(2.0)))
    if op == "pow":
        a, c = e.args
        return mul(mul(c, power(a, const(c.value - 1.0))), _diff(a, k))
    a = e.args[0]
    da = _diff(a, k)
    if da is ZERO:
        return ZERO
    if op == "sin":
        return mul(func("cos", a), da)
    if op == "cos":
        return neg(mul(func("sin", a), da))
    if op == "exp":
        return mul(e, da)
    if op == "log":
        return div(da, a)
    if op == "sqrt":
        return div(da, mul(const(2.0), e))
    raise AssertionError(op)


def diff_expr(e: Expr, coord) -> Expr:
    """Partial derivative of ``e`` along ``coord`` (a name or a coordinate index)."""
    k = _resolve_index(e, coord)
    if k < 0:
        return ZERO
    return _diff(e, k)


@lru_cache(maxsize=None)
def _derivative_sorted(e: Expr, multi_index: tuple[int, ...]) -> Expr:
    if not multi_index:
        return e
    return _diff(_derivative_sorted(e, multi_index[:-1]), multi_index[-1])


def derivative(e: Expr, multi_index: Iterable[int]) -> Expr:
    """Mixed partial derivative for a multi-index of coordinate positions.

    The multi-index is sorted before lookup, so every ordering of the same
    partials shares one cached tree.
    """
    return _derivative_sorted(e, tuple(sorted(int(i) for i in multi_index)))


# ----------------------------------------------------------------------------
# evaluation

def _check(values, bad, what, points):
    if np.any(bad):
        idx = np.argwhere(np.broadcast_to(bad, np.shape(bad)))[0]
        raise DomainError(what, _point_at(points, idx))


def _point_at(points, idx):
    pts = np.asarray(points)
    if pts.ndim <= 1:
        return pts
    return pts[tuple(idx[: pts.ndim - 1])]


def _eval_node(e: Expr, points: np.ndarray, cache: dict):
    hit = cache.get(id(e))
    if hit is not None:
        return hit
    op = e.op
    if op == "const":
        out = np.float64(e.value)
    elif op == "sym":
        out = points[..., e.value[1]]
    else:
        vals = [_eval_node(a, points, cache) for a in e.args]
        with np.errstate(all="ignore"):
            if op == "div":
                _check(vals[1], vals[1] == 0.0, "division by zero", points)
            elif op == "log":
                _check(vals[0], vals[0] <= 0.0, "log of non-positive value", points)
            elif op == "sqrt":
                _check(vals[0], vals[0] < 0.0, "sqrt of negative value", points)
            elif op == "pow":
                base, ex = vals
                if ex < 0:
                    _check(base, base == 0.0, "division by zero", points)
                if ex != int(ex):
                    _check(base, base < 0.0, "fractional power of negative value", points)
            out = _NUMPY_OPS[op](*vals)
        _check(out, ~np.isfinite(out), f"non-finite result in {op}", points)
    cache[id(e)] = out
    return out


def _as_points(p) -> np.ndarray:
    pts = np.asarray(p, dtype=float)
    if pts.ndim == 0:
        raise ValueError("point must have at least one coordinate")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts


def _check_dim(exprs: Sequence[Expr], pts: np.ndarray, dim: int | None):
    if dim is not None and pts.shape[-1] != dim:
        raise ValueError(f"point has {pts.shape[-1]} coordinates, chart dimension is {dim}")
    for e in exprs:
        for name, i in free_symbols(e):
            if i >= pts.shape[-1]:
                raise ValueError(f"coordinate {name!r} (index {i}) missing from point of length {pts.shape[-1]}")


def eval_expr(e: Expr, p, dim: int | None = None):
    """Evaluate ``e`` at a point ``(n,)`` or a batch of points ``(..., n)``.

    Returns a float for a single point and an array for a batch.  Leaving the
    real domain raises :class:`DomainError` naming the offending point.
    """
    pts = _as_points(p)
    _check_dim([e], pts, dim)
    out = np.broadcast_to(_eval_node(e, pts, {}), pts.shape[:-1])
    return float(out) if pts.ndim == 1 else np.array(out)


def eval_many(exprs: Sequence[Expr], p, dim: int | None = None) -> np.ndarray:
    """Evaluate several expressions sharing one subexpression cache.

    Result has shape ``batch + (len(exprs),)``.
    """
    pts = _as_points(p)
    _check_dim(exprs, pts, dim)
    cache: dict = {}
    out = np.empty(pts.shape[:-1] + (len(exprs),))
    for j, e in enumerate(exprs):
        out[..., j] = _eval_node(e, pts, cache)
    return out


# ----------------------------------------------------------------------------
# finite-difference oracle

_STENCILS = {
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}
# leading truncation term of each stencil: coefficient * h^2 * f^(order+2)
_TRUNCATION = {1: 1.0 / 6.0, 2: 1.0 / 12.0, 3: 1.0 / 4.0}


def fd_derivative(e: Expr, coord, p, order: int, step: float | None = None) -> float:
    """Central-difference estimate of the ``order``-th pure partial along ``coord``."""
    if order not in _STENCILS:
        raise ValueError("order must be 1, 2 or 3")
    h = FD_STEPS[order] if step is None else float(step)
    pts = _as_points(p)
    k = _resolve_index(e, coord)
    if k < 0:
        return 0.0
    total = 0.0
    for offset, weight in _STENCILS[order]:
        q = pts.copy()
        q[..., k] += offset * h
        total = total + weight * eval_expr(e, q)
    return total / h**order


def fd_check(e: Expr, coord, p, order: int, step: float | None = None,
             domain: tuple[Sequence[float], Sequence[float]] | None = None) -> float:
    """``|symbolic - central difference|`` for the ``order``-th partial along ``coord``.

    Steps default to 1e-3 for orders 1-2 and 1e-2 for order 3.  When a
    ``domain`` box ``(lower, upper)`` is given the point must sit at least
    two steps inside it.
    """
    h = FD_STEPS[order] if step is None else float(step)
    pts = _as_points(p)
    if domain is not None:
        lo, hi = (np.asarray(b, dtype=float) for b in domain)
        if np.any(pts - lo < 2 * h) or np.any(hi - pts < 2 * h):
            raise ValueError(f"point {pts.tolist()} closer than 2*step={2 * h} to the domain boundary")
    k = _resolve_index(e, coord)
    exact = eval_expr(derivative(e, [k] * order), pts) if k >= 0 else 0.0
    return np.abs(exact - fd_derivative(e, coord, pts, order, h))


def fd_tolerance(e: Expr, coord, p, order: int, step: float | None = None) -> float:
    """Acceptance bound for :func:`fd_check` at ``p``.

    Twice the leading truncation term (computed from the exact higher
    derivative) plus a rounding allowance for the stencil's cancellation.
    """
    h = FD_STEPS[order] if step is None else float(step)
    pts = _as_points(p)
    k = _resolve_index(e, coord)
    if k < 0:
        return 1e-12
    higher = np.abs(eval_expr(derivative(e, [k] * (order + 2)), pts))
    spread = np.max([np.abs(eval_expr(e, _shifted(pts, k, s * h))) for s in (-2, -1, 0, 1, 2)], axis=0)
    weight = sum(abs(w) for _, w in _STENCILS[order])
    rounding = 64 * np.finfo(float).eps * weight * spread / h**order
    return 2.0 * _TRUNCATION[order] * h**2 * higher + rounding + 1e-12


def _shifted(pts, k, delta):
    q = pts.copy()
    q[..., k] += delta
    return q
