"""Scalar fields on R^n evaluated on batches of points.

Every field maps an array of points with shape ``(..., dim)`` to values with
shape ``(...)``. Gradients and Hessians are exact where the concrete class
knows them; otherwise central finite differences are used and
``exact_derivatives`` is False.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

GRAD_STEP = 1e-4
HESS_STEP = 1e-3
ADMISSIBLE_MARGIN = 0.01


@dataclass(frozen=True)
class BoundednessCertificate:
    """Growth class of a field, used to admit exponential tilts.

    ``kind`` is one of ``"bounded"``, ``"quadratic"``, ``"unbounded"``. For
    bounded fields ``bound`` is a sup bound. For quadratic fields
    ``quadratic`` holds the symmetric matrix ``A`` of the ``x'Ax`` part and
    ``bound`` the sup bound of any bounded remainder added to the polynomial.
    """

    kind: str
    bound: Optional[float] = None
    quadratic: Optional[tuple] = None

    @classmethod
    def bounded(cls, bound: float) -> "BoundednessCertificate":
        return cls("bounded", float(bound))

    @classmethod
    def quadratic_form(cls, matrix, remainder: float = 0.0) -> "BoundednessCertificate":
        m = np.asarray(matrix, dtype=float)
        m = 0.5 * (m + m.T)
        return cls("quadratic", float(remainder), tuple(tuple(float(v) for v in row) for row in m))

    @classmethod
    def unbounded(cls) -> "BoundednessCertificate":
        return cls("unbounded")

    @property
    def matrix(self) -> Optional[np.ndarray]:
        return None if self.quadratic is None else np.array(self.quadratic, dtype=float)

    @property
    def axis_coefficients(self) -> Optional[np.ndarray]:
        m = self.matrix
        return None if m is None else np.diag(m).copy()

    def admissible(self, margin: float = ADMISSIBLE_MARGIN) -> bool:
        """True if e^u is integrable against the Gaussian with room to spare."""
        if self.kind == "bounded":
            return True
        if self.kind == "quadratic":
            return bool(np.linalg.eigvalsh(self.matrix).max() < 0.5 - margin)
        return False

    def scaled(self, c: float) -> "BoundednessCertificate":
        if self.kind == "bounded":
            return BoundednessCertificate.bounded(abs(c) * self.bound)
        if self.kind == "quadratic":
            return BoundednessCertificate.quadratic_form(c * self.matrix, abs(c) * self.bound)
        return self

    def __add__(self, other: "BoundednessCertificate") -> "BoundednessCertificate":
        if "unbounded" in (self.kind, other.kind):
            return BoundednessCertificate.unbounded()
        if self.kind == other.kind == "bounded":
            return BoundednessCertificate.bounded(self.bound + other.bound)
        a = self.matrix if self.matrix is not None else 0.0
        b = other.matrix if other.matrix is not None else 0.0
        return BoundednessCertificate.quadratic_form(a + b, self.bound + other.bound)

    def times(self, other: "BoundednessCertificate") -> "BoundednessCertificate":
        if self.kind == other.kind == "bounded":
            return BoundednessCertificate.bounded(self.bound * other.bound)
        return BoundednessCertificate.unbounded()


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        raise ValueError(f"expected points with last axis of length {dim}, got shape {x.shape}")
    return x


class ScalarField:
    """Base class: subclasses implement ``_eval`` and optionally exact derivatives."""

    dim: int
    exact_derivatives: bool = False

    def __call__(self, x) -> np.ndarray:
        return self._eval(_as_points(x, self.dim))

    def _eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        return self._grad(_as_points(x, self.dim))

    def hessian(self, x) -> np.ndarray:
        return self._hessian(_as_points(x, self.dim))

    def laplacian(self, x) -> np.ndarray:
        return np.trace(self.hessian(x), axis1=-2, axis2=-1)

    def _grad(self, x: np.ndarray) -> np.ndarray:
        h = GRAD_STEP
        out = np.empty(x.shape, dtype=float)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            out[..., i] = (self._eval(x + e) - self._eval(x - e)) / (2 * h)
        return out

    def _hessian(self, x: np.ndarray) -> np.ndarray:
        # central differences of the gradient, symmetrised
        h = HESS_STEP
        out = np.empty(x.shape + (self.dim,), dtype=float)
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = h
            out[..., :, j] = (self._grad(x + e) - self._grad(x - e)) / (2 * h)
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    def certificate(self) -> BoundednessCertificate:
        return BoundednessCertificate.unbounded()

    # arithmetic
    def __add__(self, other):
        return SumField([self, as_field(other, self.dim)])

    __radd__ = __add__

    def __sub__(self, other):
        return SumField([self, ScaledField(-1.0, as_field(other, self.dim))])

    def __rsub__(self, other):
        return SumField([as_field(other, self.dim), ScaledField(-1.0, self)])

    def __neg__(self):
        return ScaledField(-1.0, self)

    def __mul__(self, other):
        if np.isscalar(other):
            return ScaledField(float(other), self)
        return ProductField(self, as_field(other, self.dim))

    __rmul__ = __mul__

    def __truediv__(self, c):
        if not np.isscalar(c):
            raise TypeError("fields can only be divided by scalars")
        return ScaledField(1.0 / float(c), self)


def as_field(obj, dim: int) -> ScalarField:
    if isinstance(obj, ScalarField):
        if obj.dim != dim:
            raise ValueError(f"dimension mismatch: {obj.dim} vs {dim}")
        return obj
    if np.isscalar(obj):
        return ConstantField(dim, float(obj))
    raise TypeError(f"cannot interpret {obj!r} as a field")


class ConstantField(ScalarField):
    exact_derivatives = True

    def __init__(self, dim: int, value: float):
        self.dim = dim
        self.value = float(value)

    def _eval(self, x):
        return np.full(x.shape[:-1], self.value)

    def _grad(self, x):
        return np.zeros(x.shape)

    def _hessian(self, x):
        return np.zeros(x.shape + (self.dim,))

    def certificate(self):
        return BoundednessCertificate.bounded(abs(self.value))

    def __repr__(self):
        return f"ConstantField({self.dim}, {self.value!r})"


class FunctionField(ScalarField):
    """Field from plain callables; derivatives fall back to finite differences."""

    def __init__(
        self,
        dim: int,
        fn: Callable[[np.ndarray], np.ndarray],
        grad: Optional[Callable] = None,
        hessian: Optional[Callable] = None,
        certificate: Optional[BoundednessCertificate] = None,
        name: str = "field",
    ):
        self.dim = dim
        self._fn = fn
        self._grad_fn = grad
        self._hess_fn = hessian
        self._cert = certificate
        self.name = name
        self.exact_derivatives = grad is not None and hessian is not None

    def _eval(self, x):
        return np.asarray(self._fn(x), dtype=float)

    def _grad(self, x):
        if self._grad_fn is None:
            return super()._grad(x)
        return np.asarray(self._grad_fn(x), dtype=float)

    def _hessian(self, x):
        if self._hess_fn is None:
            return super()._hessian(x)
        return np.asarray(self._hess_fn(x), dtype=float)

    def certificate(self):
        return self._cert if self._cert is not None else BoundednessCertificate.unbounded()

    def __repr__(self):
        return f"FunctionField({self.name!r}, dim={self.dim})"


class SumField(ScalarField):
    def __init__(self, terms: Sequence[ScalarField]):
        flat = []
        for t in terms:
            flat.extend(t.terms if isinstance(t, SumField) else [t])
        dims = {t.dim for t in flat}
        if len(dims) != 1:
            raise ValueError(f"dimension mismatch among terms: {sorted(dims)}")
        self.dim = dims.pop()
        self.terms = tuple(flat)
        self.exact_derivatives = all(t.exact_derivatives for t in flat)

    def _eval(self, x):
        return sum(t._eval(x) for t in self.terms)

    def _grad(self, x):
        return sum(t._grad(x) for t in self.terms)

    def _hessian(self, x):
        return sum(t._hessian(x) for t in self.terms)

    def certificate(self):
        cert = self.terms[0].certificate()
        for t in self.terms[1:]:
            cert = cert + t.certificate()
        return cert

    def __repr__(self):
        return " + ".join(map(repr, self.terms))


class ScaledField(ScalarField):
    def __init__(self, c: float, f: ScalarField):
        self.dim = f.dim
        self.c = float(c)
        self.f = f
        self.exact_derivatives = f.exact_derivatives

    def _eval(self, x):
        return self.c * self.f._eval(x)

    def _grad(self, x):
        return self.c * self.f._grad(x)

    def _hessian(self, x):
        return self.c * self.f._hessian(x)

    def certificate(self):
        return self.f.certificate().scaled(self.c)

    def __repr__(self):
        return f"{self.c!r}*({self.f!r})"


class ProductField(ScalarField):
    def __init__(self, f: ScalarField, g: ScalarField):
        if f.dim != g.dim:
            raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")
        self.dim = f.dim
        self.f, self.g = f, g
        self.exact_derivatives = f.exact_derivatives and g.exact_derivatives

    def _eval(self, x):
        return self.f._eval(x) * self.g._eval(x)

    def _grad(self, x):
        return self.f._grad(x) * self.g._eval(x)[..., None] + self.f._eval(x)[..., None] * self.g._grad(x)

    def _hessian(self, x):
        fv, gv = self.f._eval(x)[..., None, None], self.g._eval(x)[..., None, None]
        df, dg = self.f._grad(x), self.g._grad(x)
        cross = df[..., :, None] * dg[..., None, :]
        return self.f._hessian(x) * gv + fv * self.g._hessian(x) + cross + np.swapaxes(cross, -1, -2)

    def certificate(self):
        return self.f.certificate().times(self.g.certificate())

    def __repr__(self):
        return f"({self.f!r})*({self.g!r})"


def grad_norm_field(f: ScalarField, norm: str = "l2") -> FunctionField:
    """The field x -> |grad f(x)| for the l1, l2 or linf vector norm."""
    order = {"l1": 1, "l2": 2, "linf": np.inf}[norm]
    return FunctionField(f.dim, lambda x: np.linalg.norm(f.grad(x), ord=order, axis=-1), name=f"|grad|_{norm}")
