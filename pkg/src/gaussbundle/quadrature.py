"""Tensor Gauss-Hermite quadrature against the standard Gaussian measure."""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .fields import ScalarField

DEFAULT_ORDER = 40
MAX_TENSOR_DIM = 4


class IntegrandOverflow(ArithmeticError):
    """A non-finite value showed up at a quadrature node."""


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and positive weights with ``sum w_k f(x_k) ~ int f dgamma``.

    Exact for polynomials of total degree <= 2*order - 1.
    """

    dim: int
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)

    def expect(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise IntegrandOverflow("non-finite integrand value at a quadrature node; reduce scale or raise order")
        # np.sum is pairwise and order-fixed, so results are bit-stable
        return float(np.sum(self.weights * values))

    def expect_weighted(self, values, density_values) -> float:
        return self.expect(np.asarray(values) * np.asarray(density_values))


@functools.lru_cache(maxsize=32)
def gauss_grid(dim: int, order: int = DEFAULT_ORDER) -> QuadratureGrid:
    if not 1 <= dim <= MAX_TENSOR_DIM:
        raise ValueError(f"tensor grids support 1 <= dim <= {MAX_TENSOR_DIM}; use Monte Carlo beyond")
    if order < 1:
        raise ValueError("order must be >= 1")
    x, w = hermegauss(order)
    w = w / math.sqrt(2 * math.pi)
    nodes = np.array(list(itertools.product(x, repeat=dim)))
    weights = np.prod(np.array(list(itertools.product(w, repeat=dim))), axis=1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureGrid(dim, order, nodes, weights)


def _check_dims(f: ScalarField, grid: QuadratureGrid):
    if f.dim != grid.dim:
        raise ValueError(f"field dim {f.dim} does not match grid dim {grid.dim}")


def integrate(f: ScalarField, grid: QuadratureGrid) -> float:
    _check_dims(f, grid)
    return grid.expect(f(grid.nodes))


def inner(f: ScalarField, g: ScalarField, grid: QuadratureGrid) -> float:
    _check_dims(f, grid)
    _check_dims(g, grid)
    return grid.expect(f(grid.nodes) * g(grid.nodes))


def ou_semigroup_integral(f: ScalarField, t: float, x, grid: QuadratureGrid) -> float:
    """Mehler form ``P_t f(x) = int f(e^{-t} x + sqrt(1 - e^{-2t}) y) gamma(dy)``."""
    if t < 0:
        raise ValueError("OU semigroup time must be non-negative")
    _check_dims(f, grid)
    x = np.asarray(x, dtype=float).reshape(grid.dim)
    a = math.exp(-t)
    b = math.sqrt(-math.expm1(-2 * t))
    return grid.expect(f(a * x + b * grid.nodes))
