"""Hyvarinen divergence and local score; Otto inner product and natural gradient."""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, optimize

from .bundle import FiberVector, linear_combination
from .expfamily import CENTER_TOL, Density, ExpDensity, shift_field
from .fields import FunctionField, ScalarField
from .hermite import HermiteField, multi_indices
from .quadrature import QuadratureGrid


def _stein_grad(u: ScalarField, x: np.ndarray) -> np.ndarray:
    # delta . grad u = x . grad u - lap u
    return np.sum(x * u.grad(x), axis=-1) - u.laplacian(x)


def hyvarinen(p: ExpDensity, q: ExpDensity, grid: Optional[QuadratureGrid] = None) -> float:
    """KH(p|q) = 1/2 E_p |grad(u_p - u_q)|^2."""
    grid = grid or p.grid
    x = grid.nodes
    d = p.u.grad(x) - q.u.grad(x)
    return 0.5 * p.expect(np.sum(d * d, axis=-1), grid)


def local_score(q: ExpDensity | ScalarField) -> ScalarField:
    """x -> 1/2 |grad u(x)|^2 - delta . grad u(x), with u the tilt of q."""
    u = q.u if isinstance(q, ExpDensity) else q

    def fn(x):
        g = u.grad(x)
        return 0.5 * np.sum(g * g, axis=-1) - _stein_grad(u, x)

    return FunctionField(u.dim, fn, name="local_score")


_C_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def score_constant(p: ExpDensity, grid: Optional[QuadratureGrid] = None) -> float:
    """c(p) = 1/2 E_p |grad u_p|^2, cached per density and grid."""
    grid = grid or p.grid
    per = _C_CACHE.setdefault(p, {})
    key = (grid.dim, grid.order)
    if key not in per:
        g = p.u.grad(grid.nodes)
        per[key] = 0.5 * p.expect(np.sum(g * g, axis=-1), grid)
    return per[key]


@dataclass(frozen=True)
class ScoreIdentity:
    divergence: float  # KH(p|q)
    constant: float  # c(p)
    score_expectation: float  # E_p[S(q)]
    cross_direct: float  # E_p[grad u_p . grad u_q]
    cross_stein: float  # E_p[delta . grad u_q]

    @property
    def discrepancy(self) -> float:
        return abs(self.divergence - (self.constant + self.score_expectation))


def score_identity_check(p: ExpDensity, q: ExpDensity, grid: Optional[QuadratureGrid] = None) -> ScoreIdentity:
    """KH(p|q) against c(p) + E_p[S(q)], plus the integration-by-parts cross term."""
    grid = grid or p.grid
    x = grid.nodes
    gp, gq = p.u.grad(x), q.u.grad(x)
    cross_direct = p.expect(np.sum(gp * gq, axis=-1), grid)
    cross_stein = p.expect(_stein_grad(q.u, x), grid)
    return ScoreIdentity(hyvarinen(p, q, grid), score_constant(p, grid), p.expect(local_score(q), grid),
                         cross_direct, cross_stein)


def score_minimizer(p: ExpDensity, direction: ScalarField, bracket=(-3.0, 3.0),
                    grid: Optional[QuadratureGrid] = None, tol: float = 1e-10) -> float:
    """argmin over theta of E_p[S(theta * direction)], by golden-section search."""
    grid = grid or p.grid
    x = grid.nodes
    g = direction.grad(x)
    sq = p.expect(np.sum(g * g, axis=-1), grid)
    st = p.expect(_stein_grad(direction, x), grid)
    res = optimize.minimize_scalar(lambda t: 0.5 * t * t * sq - t * st, bracket=bracket, method="golden",
                                   tol=tol)
    return float(res.x)


def _density_values(p: Optional[Density], x: np.ndarray) -> np.ndarray:
    return np.ones(x.shape[:-1]) if p is None else p.density(x)


def otto_inner(p: Optional[Density], f: ScalarField, g: ScalarField, grid: QuadratureGrid,
               check: bool = True) -> float:
    """<<f, g>>_p = int grad f . grad g p dgamma, for f, g centred under p."""
    x = grid.nodes
    w = _density_values(p, x)
    if check:
        for h in (f, g):
            hv = h(x)
            mean = grid.expect(hv * w)
            if abs(mean) > CENTER_TOL * max(1.0, grid.expect(np.abs(hv) * w)):
                raise ValueError(f"field is not centred under p (mean {mean:.3e})")
    return grid.expect(np.sum(f.grad(x) * g.grad(x), axis=-1) * w)


@dataclass(frozen=True)
class AdjointReport:
    inner: float  # <<f, g>>_p
    gamma_pairing: float  # int f delta.(p grad g) dgamma
    p_pairing: float  # int f delta.(p grad g) p dgamma, the alternative reading

    @property
    def discrepancy(self) -> float:
        return abs(self.inner - self.gamma_pairing)

    @property
    def p_pairing_discrepancy(self) -> float:
        return abs(self.inner - self.p_pairing)


def otto_adjoint_check(p: Optional[ExpDensity], f: ScalarField, g: ScalarField, grid: QuadratureGrid) -> AdjointReport:
    """<<f, g>>_p against <f, delta.(p grad g)>_gamma.

    delta.(p grad g) = p (x . grad g - grad u . grad g - lap g) for p = e^{u - K}.
    """
    x = grid.nodes
    w = _density_values(p, x)
    dg = g.grad(x)
    if p is None:
        dterm = np.sum(x * dg, axis=-1) - g.laplacian(x)
    else:
        du = p.u.grad(x)
        dterm = np.sum(x * dg, axis=-1) - np.sum(du * dg, axis=-1) - g.laplacian(x)
    div = w * dterm
    fv = f(x)
    inner = grid.expect(np.sum(f.grad(x) * dg, axis=-1) * w)
    return AdjointReport(inner, grid.expect(fv * div), grid.expect(fv * div * w))


class SingularGramError(np.linalg.LinAlgError):
    def __init__(self, message: str, direction: np.ndarray, eigenvalue: float):
        self.direction = direction
        self.eigenvalue = eigenvalue
        super().__init__(message)


class OttoGram:
    """A_ij = int grad b_i . grad b_j p dgamma over a finite basis."""

    def __init__(self, p: Optional[Density], basis: Sequence[ScalarField], grid: QuadratureGrid):
        self.p = p
        self.basis = tuple(basis)
        self.grid = grid
        x = grid.nodes
        w = _density_values(p, x)
        grads = [b.grad(x) for b in self.basis]
        k = len(grads)
        A = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                A[i, j] = A[j, i] = grid.expect(np.sum(grads[i] * grads[j], axis=-1) * w)
        self.matrix = A

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_positive_definite(self) -> bool:
        try:
            linalg.cholesky(self.matrix, lower=True)
        except linalg.LinAlgError:
            return False
        return True

    def cholesky(self):
        try:
            return linalg.cho_factor(self.matrix, lower=True)
        except linalg.LinAlgError:
            vals, vecs = np.linalg.eigh(self.matrix)
            raise SingularGramError(f"Otto Gram matrix is singular (smallest eigenvalue {vals[0]:.3e})",
                                    vecs[:, 0], float(vals[0])) from None


def default_basis(p: Optional[Density], dim: int, degree: int, grid: QuadratureGrid):
    """Hermite polynomials of degree 1..degree, centred under p."""
    x = grid.nodes
    w = _density_values(p, x)
    out = []
    for alpha in multi_indices(dim, degree, 1):
        b = HermiteField.basis(alpha)
        out.append(shift_field(b, grid.expect(b(x) * w)) if p is not None else b)
    return out


@dataclass
class NaturalGradient:
    coefficients: np.ndarray
    field: ScalarField
    gram: OttoGram
    rhs: np.ndarray

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.gram.matrix @ self.coefficients - self.rhs), initial=0.0))


def natural_gradient(p: Optional[Density], target: FiberVector | ScalarField, grid: QuadratureGrid,
                     basis: Optional[Sequence[ScalarField]] = None, degree: int = 4) -> NaturalGradient:
    """Galerkin solve of A c = r, r_i = E_p[target b_i], by Cholesky."""
    v = target.v if isinstance(target, FiberVector) else target
    if basis is None:
        basis = default_basis(p, v.dim, degree, grid)
    gram = OttoGram(p, basis, grid)
    x = grid.nodes
    w = _density_values(p, x)
    tv = v(x)
    r = np.array([grid.expect(tv * b(x) * w) for b in gram.basis])
    c = linalg.cho_solve(gram.cholesky(), r)
    return NaturalGradient(c, linear_combination(c, gram.basis), gram, r)
