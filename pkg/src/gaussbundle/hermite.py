"""Probabilists' Hermite polynomials and exact Hermite-expansion calculus.

A multi-index is a plain tuple of non-negative ints. ``HermiteField`` stores
``f = sum_a c_a H_a`` as a dict; derivatives (lowering), the Stein divergence
(raising) and the Ornstein-Uhlenbeck semigroup (diagonal scaling) act on the
coefficients exactly.
"""
from __future__ import annotations

import itertools
import math
from typing import Dict, Iterable, Iterator, Sequence, Tuple

import numpy as np

from .fields import BoundednessCertificate, ScalarField

MultiIndex = Tuple[int, ...]


def order(alpha: MultiIndex) -> int:
    return sum(alpha)


def multi_factorial(alpha: MultiIndex) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def multi_indices(dim: int, max_order: int, min_order: int = 0) -> Iterator[MultiIndex]:
    """All multi-indices of length ``dim`` with min_order <= |a| <= max_order, graded order."""
    for total in range(min_order, max_order + 1):
        for alpha in sorted(_compositions(total, dim), reverse=True):
            yield alpha


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def unit(dim: int, i: int) -> MultiIndex:
    return tuple(1 if j == i else 0 for j in range(dim))


def hermite_table(kmax: int, t) -> np.ndarray:
    """Stack ``[H_0(t), ..., H_kmax(t)]`` via H_{k+1} = t H_k - k H_{k-1}."""
    t = np.asarray(t, dtype=float)
    out = np.empty((kmax + 1,) + t.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = t
    for k in range(1, kmax):
        out[k + 1] = t * out[k] - k * out[k - 1]
    return out


def hermite_1d(k: int, t) -> np.ndarray:
    return hermite_table(k, t)[k]


def hermite_eval(alpha: Sequence[int], x) -> np.ndarray:
    """``H_alpha(x) = prod_i H_{alpha_i}(x_i)`` for points x of shape (..., n)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != len(alpha):
        raise ValueError(f"multi-index of length {len(alpha)} does not match point shape {x.shape}")
    out = np.ones(x.shape[:-1])
    for i, a in enumerate(alpha):
        if a:
            out = out * hermite_1d(a, x[..., i])
    return out


class HermiteField(ScalarField):
    """Finite Hermite expansion on R^dim with exact calculus."""

    exact_derivatives = True

    def __init__(self, dim: int, coeffs: Dict[MultiIndex, float] | Iterable = ()):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        clean: Dict[MultiIndex, float] = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for alpha, c in items:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or min(alpha) < 0:
                raise ValueError(f"bad multi-index {alpha} for dim {dim}")
            clean[alpha] = clean.get(alpha, 0.0) + float(c)
        self.coeffs = {a: c for a, c in clean.items() if c != 0.0}

    @classmethod
    def basis(cls, alpha: Sequence[int], coeff: float = 1.0) -> "HermiteField":
        return cls(len(alpha), {tuple(alpha): coeff})

    @classmethod
    def constant(cls, dim: int, c: float) -> "HermiteField":
        return cls(dim, {(0,) * dim: c})

    @property
    def degree(self) -> int:
        return max((order(a) for a in self.coeffs), default=0)

    @property
    def mean(self) -> float:
        return self.coeffs.get((0,) * self.dim, 0.0)

    def variance(self) -> float:
        return sum(multi_factorial(a) * c * c for a, c in self.coeffs.items() if order(a) > 0)

    def inner(self, other: "HermiteField") -> float:
        """Exact L2(gamma) inner product from orthogonality."""
        return sum(multi_factorial(a) * c * other.coeffs.get(a, 0.0) for a, c in self.coeffs.items())

    def _eval(self, x):
        out = np.zeros(x.shape[:-1])
        if not self.coeffs:
            return out
        kmax = [max(a[i] for a in self.coeffs) for i in range(self.dim)]
        tables = [hermite_table(kmax[i], x[..., i]) for i in range(self.dim)]
        for alpha, c in self.coeffs.items():
            term = np.full(x.shape[:-1], c)
            for i, a in enumerate(alpha):
                if a:
                    term = term * tables[i][a]
            out = out + term
        return out

    def partial(self, i: int) -> "HermiteField":
        if not 0 <= i < self.dim:
            raise ValueError(f"axis {i} out of range for dim {self.dim}")
        out = {}
        for alpha, c in self.coeffs.items():
            if alpha[i]:
                lowered = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
                out[lowered] = out.get(lowered, 0.0) + alpha[i] * c
        return HermiteField(self.dim, out)

    def raise_(self, i: int) -> "HermiteField":
        """delta_i f = x_i f - d_i f, i.e. H_a -> H_{a + e_i}."""
        out = {}
        for alpha, c in self.coeffs.items():
            raised = alpha[:i] + (alpha[i] + 1,) + alpha[i + 1:]
            out[raised] = c
        return HermiteField(self.dim, out)

    def gradient_fields(self):
        return [self.partial(i) for i in range(self.dim)]

    def _grad(self, x):
        return np.stack([self.partial(i)._eval(x) for i in range(self.dim)], axis=-1)

    def _hessian(self, x):
        out = np.empty(x.shape + (self.dim,))
        for i in range(self.dim):
            di = self.partial(i)
            for j in range(i, self.dim):
                out[..., i, j] = out[..., j, i] = di.partial(j)._eval(x)
        return out

    def ou(self, t: float) -> "HermiteField":
        if t < 0:
            raise ValueError("OU semigroup time must be non-negative")
        return HermiteField(self.dim, {a: c * math.exp(-order(a) * t) for a, c in self.coeffs.items()})

    def certificate(self) -> BoundednessCertificate:
        deg = self.degree
        if deg == 0:
            return BoundednessCertificate.bounded(abs(self.mean))
        if deg > 2:
            return BoundednessCertificate.unbounded()
        m = np.zeros((self.dim, self.dim))
        for alpha, c in self.coeffs.items():
            if order(alpha) != 2:
                continue
            idx = [i for i, a in enumerate(alpha) for _ in range(a)]
            i, j = idx
            if i == j:
                m[i, i] += c
            else:
                m[i, j] += c / 2
                m[j, i] += c / 2
        return BoundednessCertificate.quadratic_form(m)

    # exact algebra; anything else falls back to generic combinators
    def __add__(self, other):
        if np.isscalar(other):
            other = HermiteField.constant(self.dim, other)
        if isinstance(other, HermiteField):
            _check_dim(self, other)
            out = dict(self.coeffs)
            for a, c in other.coeffs.items():
                out[a] = out.get(a, 0.0) + c
            return HermiteField(self.dim, out)
        return super().__add__(other)

    __radd__ = __add__

    def __neg__(self):
        return HermiteField(self.dim, {a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other):
        if np.isscalar(other) or isinstance(other, HermiteField):
            return self + (-other)
        return super().__sub__(other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return HermiteField(self.dim, {a: c * float(other) for a, c in self.coeffs.items()})
        if isinstance(other, HermiteField):
            _check_dim(self, other)
            out: Dict[MultiIndex, float] = {}
            for a, ca in self.coeffs.items():
                for b, cb in other.coeffs.items():
                    for g, w in _linearize(a, b):
                        out[g] = out.get(g, 0.0) + ca * cb * w
            return HermiteField(self.dim, out)
        return super().__mul__(other)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / float(c))

    def __eq__(self, other):
        return isinstance(other, HermiteField) and self.dim == other.dim and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.dim, tuple(sorted(self.coeffs.items()))))

    def __repr__(self):
        if not self.coeffs:
            return f"HermiteField({self.dim}, 0)"
        terms = " + ".join(f"{c!r}*H{a}" for a, c in sorted(self.coeffs.items()))
        return f"HermiteField({self.dim}, {terms})"


def _check_dim(f: ScalarField, g: ScalarField):
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")


def _linearize(a: MultiIndex, b: MultiIndex):
    # H_m H_n = sum_k C(m,k) C(n,k) k! H_{m+n-2k}, axis by axis
    per_axis = []
    for m, n in zip(a, b):
        per_axis.append([(m + n - 2 * k, math.comb(m, k) * math.comb(n, k) * math.factorial(k))
                         for k in range(min(m, n) + 1)])
    for combo in itertools.product(*per_axis):
        yield tuple(d for d, _ in combo), math.prod(w for _, w in combo)


def partial(f: HermiteField, i: int) -> HermiteField:
    """Exact partial derivative along axis ``i`` (0-based): d_i H_a = a_i H_{a - e_i}."""
    return f.partial(i)


def stein_div(fields: Sequence[HermiteField]) -> HermiteField:
    """``sum_i delta_i F_i`` with delta_i H_a = H_{a + e_i}."""
    dims = {f.dim for f in fields}
    if len(dims) != 1 or dims.pop() != len(fields):
        raise ValueError("stein_div needs n fields of common dimension n")
    out = HermiteField(len(fields))
    for i, f in enumerate(fields):
        out = out + f.raise_(i)
    return out


def ou_semigroup(f: HermiteField, t: float) -> HermiteField:
    """P_t acting on Hermite coefficients: c_a -> e^{-|a| t} c_a."""
    return f.ou(t)


def gradient(f: HermiteField):
    return f.gradient_fields()


def generator(f: HermiteField) -> HermiteField:
    """``delta . grad f``, minus the OU generator; eigenvalue |a| on H_a."""
    return stein_div(f.gradient_fields())
