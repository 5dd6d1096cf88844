"""The maximal exponential family of the standard Gaussian: densities, cumulants, charts."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .fields import ADMISSIBLE_MARGIN, ConstantField, FunctionField, ScalarField, ScaledField, SumField
from .fieldspec import BinOp, ExprField, Num, hermite_text, parse, simplify
from .hermite import HermiteField
from .quadrature import DEFAULT_ORDER, IntegrandOverflow, QuadratureGrid, gauss_grid

CENTER_TOL = 1e-8
MEMBERSHIP_ORDERS = (20, 40, 80)


class InadmissibleTilt(ValueError):
    """The tilt's certificate does not guarantee integrability of e^u against the Gaussian."""

    def __init__(self, message: str, certificate=None):
        self.certificate = certificate
        super().__init__(message)


class Density:
    """Density relative to the standard Gaussian on R^dim."""

    dim: int

    def density(self, x) -> np.ndarray:
        raise NotImplementedError

    def log_density(self, x) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.density(x))

    def expect(self, f, grid: QuadratureGrid) -> float:
        """E_p[f] by quadrature; ``f`` is a field or node values."""
        values = f(grid.nodes) if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
        return grid.expect(values * self.density(grid.nodes))

    def as_field(self) -> ScalarField:
        return FunctionField(self.dim, self.density, name="density")


def shift_field(u: ScalarField, c: float) -> ScalarField:
    """u - c, keeping Hermite and expression fields in their own class."""
    if c == 0:
        return u
    if isinstance(u, HermiteField):
        return u - c
    if isinstance(u, ExprField):
        return ExprField(simplify(BinOp("-", u.expr, Num(float(c)))), u.dim)
    return u - c


def field_text(u: ScalarField) -> str:
    """Fieldspec text for Hermite, expression, constant and combined fields."""
    if isinstance(u, HermiteField):
        return hermite_text(u.coeffs)
    if isinstance(u, ExprField):
        return u.text
    if isinstance(u, ConstantField):
        return repr(u.value)
    if isinstance(u, ScaledField):
        return f"{u.c!r}*({field_text(u.f)})"
    if isinstance(u, SumField):
        return " + ".join(f"({field_text(t)})" for t in u.terms)
    raise TypeError(f"{type(u).__name__} has no text form")


def check_admissible(u: ScalarField, margin: float = ADMISSIBLE_MARGIN):
    cert = u.certificate()
    if not cert.admissible(margin):
        if cert.kind == "quadratic":
            lam = float(np.linalg.eigvalsh(cert.matrix).max())
            msg = f"quadratic tilt with top eigenvalue {lam:.6g} >= {0.5 - margin:g}"
        else:
            msg = f"tilt certificate is {cert.kind}"
        raise InadmissibleTilt(msg, cert)
    return cert


class ExpDensity(Density):
    """p = e^{u - K} relative to the Gaussian, with admissible u.

    With ``center=True`` the Gaussian mean of u is subtracted first, so the
    stored u has E_gamma[u] = 0 and K = log E_gamma[e^u].
    """

    def __init__(self, u: ScalarField, grid: Optional[QuadratureGrid] = None, center: bool = True,
                 K: Optional[float] = None):
        check_admissible(u)
        self.dim = u.dim
        self.grid = grid if grid is not None else gauss_grid(u.dim, DEFAULT_ORDER)
        if self.grid.dim != self.dim:
            raise ValueError(f"grid dim {self.grid.dim} does not match tilt dim {self.dim}")
        if center:
            u = shift_field(u, self.grid.expect(u(self.grid.nodes)))
        self.u = u
        self.centered = center
        if K is None:
            K = _log_mean_exp(u(self.grid.nodes), self.grid)
        self.K = float(K)

    @classmethod
    def from_tilt(cls, u: ScalarField, grid: Optional[QuadratureGrid] = None) -> "ExpDensity":
        return cls(u, grid)

    @classmethod
    def gaussian(cls, dim: int, grid: Optional[QuadratureGrid] = None) -> "ExpDensity":
        return cls(HermiteField(dim), grid)

    def density(self, x) -> np.ndarray:
        return np.exp(self.log_density(x))

    def log_density(self, x) -> np.ndarray:
        return self.u(x) - self.K

    def grad_log(self, x) -> np.ndarray:
        return self.u.grad(x)

    def as_field(self) -> ScalarField:
        u, K = self.u, self.K

        def grad(x):
            return self.density(x)[..., None] * u.grad(x)

        def hess(x):
            g = u.grad(x)
            return self.density(x)[..., None, None] * (u.hessian(x) + g[..., :, None] * g[..., None, :])

        return FunctionField(self.dim, self.density, grad=grad, hessian=hess, name=f"exp(u - {K!r})")

    def to_json(self) -> dict:
        return {"dim": self.dim, "u": field_text(self.u), "K": self.K}

    @classmethod
    def from_json(cls, doc: dict, grid: Optional[QuadratureGrid] = None) -> "ExpDensity":
        dim = int(doc["dim"])
        u = ExprField(parse(doc["u"], dim), dim)
        return cls(u, grid, center=False, K=float(doc["K"]) if "K" in doc else None)

    def __repr__(self):
        try:
            text = field_text(self.u)
        except TypeError:
            text = repr(self.u)
        return f"ExpDensity(dim={self.dim}, u={text!r}, K={self.K!r})"


def _log_mean_exp(values: np.ndarray, grid: QuadratureGrid) -> float:
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise IntegrandOverflow("non-finite exponent at a quadrature node")
    out = float(logsumexp(values, b=grid.weights))
    if not math.isfinite(out):
        raise IntegrandOverflow("cumulant overflow")
    return out


class MixtureDensity(Density):
    """Finite convex combination of densities."""

    def __init__(self, components: Sequence[Tuple[float, Density]]):
        if not components:
            raise ValueError("empty mixture")
        weights = np.array([float(w) for w, _ in components])
        if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        dims = {p.dim for _, p in components}
        if len(dims) != 1:
            raise ValueError("mixture components differ in dimension")
        self.dim = dims.pop()
        self.components = tuple((float(w), p) for w, p in components)

    def density(self, x) -> np.ndarray:
        return sum(w * p.density(x) for w, p in self.components if w)

    def __repr__(self):
        return f"MixtureDensity({list(self.components)!r})"


def cumulant(p: ExpDensity, v: ScalarField, grid: Optional[QuadratureGrid] = None) -> float:
    """K_p(v) = log E_p[e^v]."""
    grid = grid or p.grid
    check_admissible(p.u + v)
    nodes = grid.nodes
    return _log_mean_exp(v(nodes) + p.log_density(nodes), grid)


def exp_chart(p: ExpDensity, q: ExpDensity, grid: Optional[QuadratureGrid] = None) -> ScalarField:
    """log(q/p) centred under p; the normalising constants cancel."""
    if p.dim != q.dim:
        raise ValueError("densities differ in dimension")
    grid = grid or p.grid
    d = q.u - p.u
    return shift_field(d, p.expect(d, grid))


def exp_chart_inverse(p: ExpDensity, v: ScalarField, grid: Optional[QuadratureGrid] = None) -> ExpDensity:
    """e^{v - K_p(v)} p, for v centred under p."""
    grid = grid or p.grid
    mean = p.expect(v, grid)
    if abs(mean) > CENTER_TOL * max(1.0, p.expect(np.abs(v(grid.nodes)), grid)):
        raise ValueError(f"chart coordinate is not centred under the base density (mean {mean:.3e})")
    return ExpDensity(p.u + v, grid)


def mix_chart(p: Density, q: Density, grid: QuadratureGrid) -> ScalarField:
    """q/p - 1 as an evaluable field."""
    if p.dim != q.dim:
        raise ValueError("densities differ in dimension")
    if np.any(p.density(grid.nodes) <= 0):
        raise ZeroDivisionError("base density vanishes at a quadrature node")
    return FunctionField(p.dim, lambda x: q.density(x) / p.density(x) - 1.0, name="mix_chart")


@dataclass(frozen=True)
class MembershipReport:
    verdict: str  # pass, fail, inconclusive
    orders: tuple
    square_integrals: tuple
    inverse_integrals: tuple


def membership_check(p: Density, orders: Sequence[int] = MEMBERSHIP_ORDERS, rtol: float = 1e-4,
                     growth: float = 10.0) -> MembershipReport:
    """Refinement heuristic for finiteness of int p^2 dgamma and int 1/p dgamma."""
    sq, inv = [], []
    for m in orders:
        grid = gauss_grid(p.dim, m)
        d = p.density(grid.nodes)
        if np.any(d <= 0):
            raise ValueError("density is not positive at every node")
        with np.errstate(over="ignore"):
            sq.append(float(np.sum(grid.weights * d * d)))
            inv.append(float(np.sum(grid.weights / d)))
    verdict = "inconclusive"
    for seq in (sq, inv):
        a = np.array(seq)
        if not np.all(np.isfinite(a)) or np.any(a[1:] > growth * a[:-1]):
            verdict = "fail"
    if verdict != "fail":
        # converged when the two finest orders agree
        rel = lambda a: abs(a[-1] - a[-2]) / abs(a[-1])  # noqa: E731
        if rel(sq) <= rtol and rel(inv) <= rtol:
            verdict = "pass"
    return MembershipReport(verdict, tuple(orders), tuple(sq), tuple(inv))
