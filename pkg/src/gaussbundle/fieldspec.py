"""A small expression language for scalar fields, with symbolic derivatives.

Grammar (whitespace insensitive)::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | atom ("^" INT)?
    atom   := NUMBER | "x" INT | "H(" INT "," INT ")" | FUNC "(" expr ")" | "(" expr ")"
    FUNC   := sin | cos | tanh | exp | neg

Variables and Hermite axes are 1-based in the text (``x1``, ``H(k, 1)``);
``differentiate`` takes 0-based axes like the rest of the library.
A minus sign directly in front of a number literal is folded into the
literal, so ``-2`` is ``Num(-2.0)`` while ``-(2)`` is ``Neg(Num(2.0))``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import hermite_e

from .fields import BoundednessCertificate, ScalarField
from .hermite import hermite_1d

FUNCS = ("sin", "cos", "tanh", "exp")


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, src: str = ""):
        self.pos = pos
        self.src = src
        super().__init__(f"{message} at position {pos}")


# ---------------------------------------------------------------- AST


class Expr:
    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based


@dataclass(frozen=True)
class Herm(Expr):
    k: int
    index: int  # 1-based


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    n: int


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


def Add(a, b):  # noqa: N802
    return BinOp("+", a, b)


def Sub(a, b):  # noqa: N802
    return BinOp("-", a, b)


def Mul(a, b):  # noqa: N802
    return BinOp("*", a, b)


def Div(a, b):  # noqa: N802
    return BinOp("/", a, b)


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z]+\d*)|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    text: str
    pos: int


def tokenize(src: str) -> List[Token]:
    out = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(Token(kind, m.group(kind), start))
        pos = m.end()
    out.append(Token("end", "", n))
    return out


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, src: str, dim: int):
        self.src = src
        self.dim = dim
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.pos, self.src)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("op",):
            what = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {what!r}")
        return self.advance()

    def integer(self) -> int:
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            raise self.error("expected a non-negative integer")
        self.advance()
        return int(t.text)

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected token {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            nxt = self.tok
            if nxt.kind == "num" and not self._followed_by_pow():
                self.advance()
                return Num(-float(nxt.text))
            return Neg(self.factor())
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Pow(base, self.integer())
        return base

    def _followed_by_pow(self) -> bool:
        nxt = self.toks[self.i + 1]
        return nxt.kind == "op" and nxt.text == "^"

    def _axis(self, index: int, tok: Token) -> int:
        if not 1 <= index <= self.dim:
            raise ParseError(f"variable index {index} out of range for dim {self.dim}", tok.pos, self.src)
        return index

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            self.advance()
            m = re.fullmatch(r"x(\d+)", t.text)
            if m:
                return Var(self._axis(int(m.group(1)), t))
            if t.text == "H":
                self.expect("(")
                k = self.integer()
                self.expect(",")
                idx_tok = self.tok
                i = self.integer()
                self.expect(")")
                return Herm(k, self._axis(i, idx_tok))
            if t.text in FUNCS or t.text == "neg":
                self.expect("(")
                arg = self.expr()
                if self.tok.kind == "op" and self.tok.text == ",":
                    raise self.error(f"{t.text} takes exactly one argument")
                self.expect(")")
                return Neg(arg) if t.text == "neg" else Func(t.text, arg)
            raise ParseError(f"unknown identifier {t.text!r}", t.pos, self.src)
        what = t.text or "end of input"
        raise self.error(f"unexpected token {what!r}")


def parse(src: str, dim: int) -> Expr:
    """Parse ``src`` into an expression tree over x1..x<dim>."""
    if dim < 1:
        raise ValueError("dim must be positive")
    return _Parser(src, dim).parse()


# ---------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_UNARY, _POW, _ATOM = 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _UNARY
    if isinstance(e, Num) and (e.value < 0 or math.copysign(1, e.value) < 0):
        return _UNARY
    if isinstance(e, Pow):
        return _POW
    return _ATOM


def _num_text(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"non-finite literal {v!r} has no text form")
    return repr(float(v))


def to_text(e: Expr) -> str:
    """Minimal-parenthesis text that parses back to the same tree."""

    def wrap(child: Expr, need: int) -> str:
        s = to_text(child)
        return f"({s})" if _prec(child) < need else s

    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Herm):
        return f"H({e.k},{e.index})"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = e.arg
        # a bare literal after '-' would be folded into the literal
        if isinstance(inner, Num):
            return f"-({to_text(inner)})"
        return "-" + wrap(inner, _UNARY)
    if isinstance(e, Pow):
        base = e.base
        need = _ATOM
        s = to_text(base)
        return f"{'(' + s + ')' if _prec(base) < need else s}^{e.n}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        return f"{wrap(e.left, p)} {e.op} {wrap(e.right, p + 1)}"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------- evaluation


def evaluate(e: Expr, x: np.ndarray) -> np.ndarray:
    """Evaluate on points ``x`` of shape (..., dim)."""
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    if isinstance(e, Num):
        return np.full(shape, e.value)
    if isinstance(e, Var):
        return x[..., e.index - 1].copy()
    if isinstance(e, Herm):
        return hermite_1d(e.k, x[..., e.index - 1])
    if isinstance(e, Neg):
        return -evaluate(e.arg, x)
    if isinstance(e, Pow):
        return evaluate(e.base, x) ** e.n
    if isinstance(e, Func):
        return getattr(np, e.name)(evaluate(e.arg, x))
    if isinstance(e, BinOp):
        a, b = evaluate(e.left, x), evaluate(e.right, x)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if np.any(b == 0):
            raise ZeroDivisionError(f"division by zero in {to_text(e)!r}")
        return a / b
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------- simplifier


def _is(e: Expr, v: float) -> bool:
    return isinstance(e, Num) and e.value == v


def simplify(e: Expr) -> Expr:
    """Constant folding plus 0+e, e+0, 1*e, e*1, 0*e, e/1, e^1, e^0."""
    if isinstance(e, Herm) and e.k == 0:
        return Num(1.0)
    if isinstance(e, (Num, Var, Herm)):
        return e
    if isinstance(e, Neg):
        a = simplify(e.arg)
        if isinstance(a, Num):
            return Num(-a.value)
        if isinstance(a, Neg):
            return a.arg
        return Neg(a)
    if isinstance(e, Pow):
        b = simplify(e.base)
        if e.n == 0:
            return Num(1.0)
        if e.n == 1:
            return b
        if isinstance(b, Num):
            return Num(b.value ** e.n)
        return Pow(b, e.n)
    if isinstance(e, Func):
        a = simplify(e.arg)
        if isinstance(a, Num):
            return Num(float(getattr(np, e.name)(a.value)))
        return Func(e.name, a)
    l, r = simplify(e.left), simplify(e.right)
    op = e.op
    if isinstance(l, Num) and isinstance(r, Num) and not (op == "/" and r.value == 0):
        return Num({"+": l.value + r.value, "-": l.value - r.value,
                    "*": l.value * r.value, "/": l.value / r.value if r.value else 0.0}[op])
    if op == "+":
        if _is(l, 0):
            return r
        if _is(r, 0):
            return l
    elif op == "-":
        if _is(r, 0):
            return l
        if _is(l, 0):
            return simplify(Neg(r))
    elif op == "*":
        if _is(l, 0) or _is(r, 0):
            return Num(0.0)
        if _is(l, 1):
            return r
        if _is(r, 1):
            return l
    elif op == "/":
        if _is(r, 1):
            return l
        if _is(l, 0) and not isinstance(r, Num):
            return Num(0.0)
    return BinOp(op, l, r)


# ---------------------------------------------------------------- derivatives


def _d(e: Expr, i: int) -> Expr:
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.index == i + 1 else 0.0)
    if isinstance(e, Herm):
        if e.index != i + 1 or e.k == 0:
            return Num(0.0)
        return Mul(Num(float(e.k)), Herm(e.k - 1, e.index))
    if isinstance(e, Neg):
        return Neg(_d(e.arg, i))
    if isinstance(e, Pow):
        if e.n == 0:
            return Num(0.0)
        return Mul(Mul(Num(float(e.n)), Pow(e.base, e.n - 1)), _d(e.base, i))
    if isinstance(e, Func):
        a, da = e.arg, _d(e.arg, i)
        outer = {
            "sin": lambda: Func("cos", a),
            "cos": lambda: Neg(Func("sin", a)),
            "tanh": lambda: Sub(Num(1.0), Pow(Func("tanh", a), 2)),
            "exp": lambda: Func("exp", a),
        }[e.name]()
        return Mul(outer, da)
    l, r = e.left, e.right
    if e.op in "+-":
        return BinOp(e.op, _d(l, i), _d(r, i))
    if e.op == "*":
        return Add(Mul(_d(l, i), r), Mul(l, _d(r, i)))
    # quotient rule
    return Div(Sub(Mul(_d(l, i), r), Mul(l, _d(r, i))), Pow(r, 2))


def differentiate(e: Expr, i: int) -> Expr:
    """Symbolic partial derivative along 0-based axis ``i``, simplified."""
    if i < 0:
        raise ValueError("axis must be non-negative")
    return simplify(_d(e, i))


def max_index(e: Expr) -> int:
    if isinstance(e, (Var, Herm)):
        return e.index
    if isinstance(e, Num):
        return 0
    if isinstance(e, (Neg, Func)):
        return max_index(e.arg)
    if isinstance(e, Pow):
        return max_index(e.base)
    return max(max_index(e.left), max_index(e.right))


def contains_func(e: Expr, name: str) -> bool:
    if isinstance(e, Func) and e.name == name:
        return True
    if isinstance(e, (Neg, Func)):
        return contains_func(e.arg, name)
    if isinstance(e, Pow):
        return contains_func(e.base, name)
    if isinstance(e, BinOp):
        return contains_func(e.left, name) or contains_func(e.right, name)
    return False


# ---------------------------------------------------------------- certification

Poly = Dict[Tuple[int, ...], float]


@dataclass
class _Growth:
    # polynomial part plus a bounded remainder with sup <= bound
    poly: Poly
    bound: float

    def degree(self) -> int:
        return max((sum(m) for m, c in self.poly.items() if c != 0), default=0)

    def pure_constant(self) -> Optional[float]:
        if self.bound == 0 and self.degree() == 0:
            return sum(c for m, c in self.poly.items())
        return None


def _poly_add(a: Poly, b: Poly, sign: float = 1.0) -> Poly:
    out = dict(a)
    for m, c in b.items():
        out[m] = out.get(m, 0.0) + sign * c
    return out


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            out[m] = out.get(m, 0.0) + ca * cb
    return out


def _growth(e: Expr, dim: int) -> Optional[_Growth]:
    zero = (0,) * dim
    if isinstance(e, Num):
        return _Growth({zero: e.value}, 0.0)
    if isinstance(e, Var):
        m = [0] * dim
        m[e.index - 1] = 1
        return _Growth({tuple(m): 1.0}, 0.0)
    if isinstance(e, Herm):
        coeffs = hermite_e.herme2poly([0] * e.k + [1])
        poly = {}
        for p, c in enumerate(coeffs):
            if c:
                m = [0] * dim
                m[e.index - 1] = p
                poly[tuple(m)] = float(c)
        return _Growth(poly, 0.0)
    if isinstance(e, Func):
        if e.name == "exp":
            return None
        # sin, cos, tanh are bounded by 1 whatever the argument,
        # but an exp inside still disqualifies the tree
        return None if contains_func(e.arg, "exp") else _Growth({}, 1.0)
    if isinstance(e, Neg):
        g = _growth(e.arg, dim)
        return None if g is None else _Growth({m: -c for m, c in g.poly.items()}, g.bound)
    if isinstance(e, Pow):
        g = _growth(e.base, dim)
        if g is None:
            return None
        out = _Growth({zero: 1.0}, 0.0)
        for _ in range(e.n):
            out = _growth_mul(out, g)
            if out is None:
                return None
        return out
    a, b = _growth(e.left, dim), _growth(e.right, dim)
    if a is None or b is None:
        return None
    if e.op in "+-":
        return _Growth(_poly_add(a.poly, b.poly, 1.0 if e.op == "+" else -1.0), a.bound + b.bound)
    if e.op == "*":
        return _growth_mul(a, b)
    c = b.pure_constant()
    if c is None or c == 0:
        return None
    return _Growth({m: v / c for m, v in a.poly.items()}, a.bound / abs(c))


def _growth_mul(a: _Growth, b: _Growth) -> Optional[_Growth]:
    ca, cb = a.pure_constant(), b.pure_constant()
    if ca is not None:
        return _Growth({m: ca * v for m, v in b.poly.items()}, abs(ca) * b.bound)
    if cb is not None:
        return _Growth({m: cb * v for m, v in a.poly.items()}, abs(cb) * a.bound)
    if a.bound == 0 and b.bound == 0:
        return _Growth(_poly_mul(a.poly, b.poly), 0.0)
    if a.degree() == 0 and b.degree() == 0:
        sa = a.bound + abs(sum(a.poly.values()))
        sb = b.bound + abs(sum(b.poly.values()))
        return _Growth({}, sa * sb)
    return None


def certify(e: Expr, dim: int) -> BoundednessCertificate:
    """Growth class: bounded (with a sup bound), quadratic, or unbounded.

    Any tree containing ``exp`` is unbounded. Sums of bounded atoms and a
    polynomial of total degree <= 2 are quadratic, with the bounded part's
    sup recorded as the remainder.
    """
    g = _growth(e, dim)
    if g is None or g.degree() > 2:
        return BoundednessCertificate.unbounded()
    if g.degree() == 0:
        const = sum(g.poly.values())
        return BoundednessCertificate.bounded(abs(const) + g.bound)
    A = np.zeros((dim, dim))
    for m, c in g.poly.items():
        if sum(m) != 2:
            continue
        idx = [i for i, k in enumerate(m) for _ in range(k)]
        i, j = idx
        if i == j:
            A[i, i] += c
        else:
            A[i, j] += c / 2
            A[j, i] += c / 2
    return BoundednessCertificate.quadratic_form(A, g.bound)


# ---------------------------------------------------------------- fields


class ExprField(ScalarField):
    """Scalar field backed by an expression tree, with symbolic gradient and Hessian."""

    exact_derivatives = True

    def __init__(self, expr: Expr, dim: int):
        if max_index(expr) > dim:
            raise ValueError(f"expression uses x{max_index(expr)} but dim is {dim}")
        self.expr = expr
        self.dim = dim
        self._dexpr: Optional[List[Expr]] = None
        self._ddexpr: Optional[List[List[Expr]]] = None

    @classmethod
    def parse(cls, src: str, dim: int) -> "ExprField":
        return cls(parse(src, dim), dim)

    @property
    def text(self) -> str:
        return to_text(self.expr)

    def derivative_exprs(self) -> List[Expr]:
        if self._dexpr is None:
            self._dexpr = [differentiate(self.expr, i) for i in range(self.dim)]
        return self._dexpr

    def partial(self, i: int) -> "ExprField":
        return ExprField(self.derivative_exprs()[i], self.dim)

    def _eval(self, x):
        return evaluate(self.expr, x)

    def _grad(self, x):
        return np.stack([evaluate(d, x) for d in self.derivative_exprs()], axis=-1)

    def _hessian(self, x):
        if self._ddexpr is None:
            d = self.derivative_exprs()
            self._ddexpr = [[differentiate(d[i], j) for j in range(self.dim)] for i in range(self.dim)]
        out = np.empty(x.shape + (self.dim,))
        for i in range(self.dim):
            for j in range(i, self.dim):
                out[..., i, j] = out[..., j, i] = evaluate(self._ddexpr[i][j], x)
        return out

    def certificate(self) -> BoundednessCertificate:
        return certify(self.expr, self.dim)

    def __repr__(self):
        return f"ExprField({self.text!r}, dim={self.dim})"


def parse_field(src: str, dim: int) -> ExprField:
    return ExprField.parse(src, dim)


def hermite_text(coeffs: Dict[Tuple[int, ...], float]) -> str:
    """Text form of a Hermite expansion ``sum c_a H_a``."""
    terms = []
    for alpha, c in sorted(coeffs.items()):
        factors = [f"H({k},{i + 1})" for i, k in enumerate(alpha) if k]
        if not factors:
            terms.append(_num_text(c))
        else:
            terms.append("*".join([_num_text(c)] + factors))
    if not terms:
        return "0.0"
    return " + ".join(f"({t})" if t.startswith("-") else t for t in terms)
