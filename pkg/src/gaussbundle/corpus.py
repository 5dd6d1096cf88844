"""Seeded random fields, tilts and expression trees for test corpora."""
from __future__ import annotations

from typing import List

import numpy as np

from .fieldspec import FUNCS, BinOp, Expr, ExprField, Func, Herm, Neg, Num, Pow, Var, parse
from .hermite import HermiteField, multi_indices


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


def random_hermite(dim: int, max_degree: int, rng: np.random.Generator, scale: float = 1.0,
                   min_degree: int = 0) -> HermiteField:
    """Random coefficients on every multi-index with min_degree <= |a| <= max_degree."""
    alphas = list(multi_indices(dim, max_degree, min_degree))
    coeffs = rng.normal(size=len(alphas)) * scale
    return HermiteField(dim, dict(zip(alphas, coeffs)))


def _coef(rng, lo=0.1, hi=1.0) -> float:
    # short decimals keep the text readable and exactly round-trippable
    return float(np.round(rng.uniform(lo, hi) * rng.choice([-1.0, 1.0]), 3))


def random_bounded_text(dim: int, rng: np.random.Generator, terms: int = 2) -> str:
    """Sum of c * FUNC(a x_i + b x_j) with FUNC in sin, cos, tanh.

    Slopes stay small (tanh below 0.4, sin and cos below 1): e^{c sin(a x)}
    oscillates faster as a c grows, and tanh has complex poles at i pi / (2a).
    Either way Gauss-Hermite sums at order 40 lose accuracy.
    """
    out = []
    for _ in range(terms):
        fn = str(rng.choice(["sin", "cos", "tanh"]))
        hi = 0.4 if fn == "tanh" else 1.0
        i = int(rng.integers(1, dim + 1))
        arg = f"{_coef(rng, 0.2, hi)}*x{i}"
        if dim > 1 and rng.random() < 0.5:
            j = (i + int(rng.integers(0, dim - 1))) % dim + 1  # a second axis, never i
            arg += f" + {abs(_coef(rng, 0.1, min(hi, 0.5)))}*x{j}"
        out.append(f"{_coef(rng, 0.2, 1.0)}*{fn}({arg})")
    return " + ".join(out)


def random_quadratic_text(dim: int, rng: np.random.Generator, quad_scale: float = 0.15,
                          lin_scale: float = 0.5) -> str:
    """Hermite quadratic with a small diagonal and linear part; top eigenvalue < 0.45 for dim <= 4."""
    out = []
    for i in range(1, dim + 1):
        out.append(f"{float(np.round(rng.uniform(-quad_scale, quad_scale), 3))}*H(2,{i})")
        out.append(f"{float(np.round(rng.uniform(-lin_scale, lin_scale), 3))}*x{i}")
    return " + ".join(f"({t})" if t.startswith("-") else t for t in out)


def random_tilt(dim: int, rng: np.random.Generator, kind: str = "mixed") -> ExprField:
    """Admissible tilt: ``bounded``, ``linear``, ``quadratic`` or ``mixed`` (bounded + small quadratic)."""
    if kind == "bounded":
        text = random_bounded_text(dim, rng)
    elif kind == "linear":
        text = " + ".join(f"{_coef(rng, 0.1, 1.0)}*x{i}" for i in range(1, dim + 1))
    elif kind == "quadratic":
        text = random_quadratic_text(dim, rng)
    elif kind == "mixed":
        text = random_bounded_text(dim, rng, 1) + " + " + random_quadratic_text(dim, rng, 0.1, 0.3)
    else:
        raise ValueError(f"unknown tilt kind {kind!r}")
    return ExprField(parse(text, dim), dim)


def random_lipschitz(dim: int, rng: np.random.Generator) -> ExprField:
    """Bounded smooth field with Lipschitz constant of order one."""
    return ExprField(parse(random_bounded_text(dim, rng), dim), dim)


def random_tree(dim: int, depth: int, rng: np.random.Generator) -> Expr:
    """Random expression tree of depth <= ``depth`` for round-trip tests."""
    if depth <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.4:
            return Num(float(np.round(rng.uniform(-5, 5), 3)))
        if r < 0.75:
            return Var(int(rng.integers(1, dim + 1)))
        return Herm(int(rng.integers(0, 6)), int(rng.integers(1, dim + 1)))
    r = rng.random()
    if r < 0.5:
        op = str(rng.choice(["+", "-", "*", "/"]))
        return BinOp(op, random_tree(dim, depth - 1, rng), random_tree(dim, depth - 1, rng))
    if r < 0.65:
        return Neg(random_tree(dim, depth - 1, rng))
    if r < 0.8:
        return Pow(random_tree(dim, depth - 1, rng), int(rng.integers(0, 4)))
    return Func(str(rng.choice(FUNCS)), random_tree(dim, depth - 1, rng))


def corpus_fields(dim: int, n: int, seed: int) -> List:
    """Mixed corpus of bounded expressions and low-degree Hermite fields."""
    rng = rng_for(seed)
    out = []
    for k in range(n):
        if k % 2 == 0:
            out.append(random_lipschitz(dim, rng))
        else:
            out.append(random_hermite(dim, 2, rng, 0.3, 1))
    return out
