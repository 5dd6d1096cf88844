"""Statistical-bundle fibers, the two dual transports, and curve dynamics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .expfamily import (CENTER_TOL, Density, ExpDensity, MixtureDensity, check_admissible, mix_chart,
                        shift_field)
from .fields import FunctionField, ScalarField
from .hermite import HermiteField
from .quadrature import QuadratureGrid

TIME_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class FiberVector:
    """A random variable ``v`` with zero mean under ``base``."""

    base: Density
    v: ScalarField

    def check(self, grid: QuadratureGrid, tol: float = CENTER_TOL) -> float:
        """Return E_base[v]; raise if it exceeds ``tol`` (relative to E_base|v| when that is large)."""
        mean = self.base.expect(self.v, grid)
        scale = max(1.0, self.base.expect(np.abs(self.v(grid.nodes)), grid))
        if abs(mean) > tol * scale:
            raise ValueError(f"fiber vector is not centred: E_base[v] = {mean:.3e}")
        return mean

    def values(self, grid: QuadratureGrid) -> np.ndarray:
        return self.v(grid.nodes)


def _same_base(a: Density, b: Density, grid: QuadratureGrid) -> bool:
    if a is b:
        return True
    return bool(np.allclose(a.density(grid.nodes), b.density(grid.nodes), rtol=1e-13, atol=0))


def _require_base(w: FiberVector, frm: Density, grid: QuadratureGrid):
    if not _same_base(w.base, frm, grid):
        raise ValueError("fiber vector is not based at the source density")


def e_transport(frm: Density, to: Density, w: FiberVector, grid: QuadratureGrid) -> FiberVector:
    """Exponential transport: v -> v - E_to[v]."""
    _require_base(w, frm, grid)
    return FiberVector(to, shift_field(w.v, to.expect(w.v, grid)))


def m_transport(frm: Density, to: Density, w: FiberVector, grid: QuadratureGrid) -> FiberVector:
    """Mixture transport: v -> (frm / to) v."""
    _require_base(w, frm, grid)
    if np.any(to.density(grid.nodes) <= 0):
        raise ZeroDivisionError("target density vanishes at a quadrature node")
    if frm is to:
        return FiberVector(to, w.v)
    v = w.v
    return FiberVector(to, FunctionField(v.dim, lambda x: frm.density(x) / to.density(x) * v(x), name="m_transport"))


def pairing(base: Density, u, v, grid: QuadratureGrid) -> float:
    """<u, v>_base = E_base[u v] for fields or fiber vectors."""
    fu = u.v if isinstance(u, FiberVector) else u
    fv = v.v if isinstance(v, FiberVector) else v
    return base.expect(fu(grid.nodes) * fv(grid.nodes), grid)


@dataclass(frozen=True)
class DualityReport:
    lhs: float  # <e-transport u, v'>_nu
    rhs: float  # <u, m-transport v'>_mu
    inner_lhs: float  # <u, v>_mu
    inner_rhs: float  # <e-transport u, m-transport v>_nu

    @property
    def discrepancy(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def inner_discrepancy(self) -> float:
        return abs(self.inner_lhs - self.inner_rhs)


def duality_check(mu: Density, nu: Density, u: FiberVector, v: FiberVector, grid: QuadratureGrid) -> DualityReport:
    """Both transport dualities for u, v in the fiber at mu; v' is v e-transported to nu."""
    ue = e_transport(mu, nu, u, grid)
    v_nu = e_transport(mu, nu, v, grid)
    lhs = pairing(nu, ue, v_nu, grid)
    rhs = pairing(mu, u, m_transport(nu, mu, v_nu, grid), grid)
    inner_lhs = pairing(mu, u, v, grid)
    inner_rhs = pairing(nu, ue, m_transport(mu, nu, v, grid), grid)
    return DualityReport(lhs, rhs, inner_lhs, inner_rhs)


def linear_combination(coeffs: Sequence[float], fields: Sequence[ScalarField], const: float = 0.0) -> ScalarField:
    """sum c_i f_i + const, exact for Hermite bases."""
    dim = fields[0].dim
    if all(isinstance(f, HermiteField) for f in fields):
        out = HermiteField.constant(dim, const)
        for c, f in zip(coeffs, fields):
            out = out + f * float(c)
        return out
    out = None
    for c, f in zip(coeffs, fields):
        if c == 0:
            continue
        term = f * float(c)
        out = term if out is None else out + term
    if out is None:
        return HermiteField.constant(dim, const)
    return shift_field(out, -const) if const else out


@dataclass(eq=False)
class Curve:
    """t -> e^{sum theta_i(t) b_i - K_p(theta(t))} p on an open interval.

    ``dtheta`` and ``ddtheta`` may supply exact time derivatives; otherwise
    central differences with step ``TIME_STEP`` are used.
    """

    basis: Tuple[ScalarField, ...]
    theta: Callable[[float], Sequence[float]]
    base: ExpDensity
    interval: Tuple[float, float] = (-1.0, 1.0)
    dtheta: Optional[Callable[[float], Sequence[float]]] = None
    ddtheta: Optional[Callable[[float], Sequence[float]]] = None
    grid: Optional[QuadratureGrid] = None

    def __post_init__(self):
        self.basis = tuple(self.basis)
        if self.grid is None:
            self.grid = self.base.grid

    def coords(self, t: float) -> np.ndarray:
        return np.asarray(self.theta(t), dtype=float)

    def tilt(self, t: float) -> ScalarField:
        return linear_combination(self.coords(t), self.basis)

    def tilt_values(self, t: float, grid: QuadratureGrid) -> np.ndarray:
        th = self.coords(t)
        return sum(c * b(grid.nodes) for c, b in zip(th, self.basis)) if len(th) else np.zeros(grid.size)

    def cumulant(self, t: float, grid: Optional[QuadratureGrid] = None) -> float:
        grid = grid or self.grid
        return float(logsumexp(self.tilt_values(t, grid) + self.base.log_density(grid.nodes), b=grid.weights))

    def at(self, t: float) -> ExpDensity:
        self._check_t(t, interior=False)
        return ExpDensity(self.base.u + self.tilt(t), self.grid)

    def _check_t(self, t: float, interior: bool = True):
        a, b = self.interval
        if interior and not a < t < b:
            raise ValueError(f"t = {t} is not interior to {self.interval}")
        if not interior and not a <= t <= b:
            raise ValueError(f"t = {t} is outside {self.interval}")

    def _derivs(self, t: float):
        h = TIME_STEP
        if self.dtheta is not None:
            d1 = np.asarray(self.dtheta(t), dtype=float)
        else:
            d1 = (self.coords(t + h) - self.coords(t - h)) / (2 * h)
        if self.ddtheta is not None:
            d2 = np.asarray(self.ddtheta(t), dtype=float)
        else:
            d2 = (self.coords(t + h) - 2 * self.coords(t) + self.coords(t - h)) / h ** 2
        return d1, d2


def velocity(c: Curve, t: float, grid: Optional[QuadratureGrid] = None) -> FiberVector:
    """Fisher score d/dt log c(t) as a fiber vector at c(t)."""
    grid = grid or c.grid
    c._check_t(t)
    d1, _ = c._derivs(t)
    density = c.at(t)
    field = linear_combination(d1, c.basis)
    if c.dtheta is not None:
        # exact: K' = E_{c(t)}[sum theta_i' b_i]
        k1 = density.expect(field, grid)
    else:
        h = TIME_STEP
        k1 = (c.cumulant(t + h, grid) - c.cumulant(t - h, grid)) / (2 * h)
    return FiberVector(density, shift_field(field, k1))


def acceleration(c: Curve, t: float, grid: Optional[QuadratureGrid] = None) -> FiberVector:
    """Second log-derivative plus E[(first log-derivative)^2] at c(t)."""
    grid = grid or c.grid
    c._check_t(t)
    d1, d2 = c._derivs(t)
    density = c.at(t)
    f1 = linear_combination(d1, c.basis)
    f2 = linear_combination(d2, c.basis)
    if c.dtheta is not None and c.ddtheta is not None:
        w = density.density(grid.nodes)
        v1 = f1(grid.nodes)
        m1 = grid.expect(v1 * w)
        k2 = grid.expect((v1 - m1) ** 2 * w) + grid.expect(f2(grid.nodes) * w)
        k1 = m1
    else:
        h = TIME_STEP
        K = [c.cumulant(t + s, grid) for s in (-h, 0.0, h)]
        k1 = (K[2] - K[0]) / (2 * h)
        k2 = (K[2] - 2 * K[1] + K[0]) / h ** 2
    score = f1(grid.nodes) - k1
    e_sq = density.expect(score * score, grid)
    return FiberVector(density, shift_field(f2, k2 - e_sq))


def acceleration_transport(c: Curve, t: float, grid: Optional[QuadratureGrid] = None) -> np.ndarray:
    """d/ds of the velocity at t + s e-transported back to c(t), at s = 0; node values."""
    grid = grid or c.grid
    h = TIME_STEP
    here = c.at(t)
    vals = []
    for s in (-h, h):
        v = velocity(c, t + s, grid)
        vals.append(e_transport(v.base, here, v, grid).values(grid))
    return (vals[1] - vals[0]) / (2 * h)


def sup_norm(w: FiberVector, grid: QuadratureGrid) -> float:
    return float(np.max(np.abs(w.values(grid))))


def geodesic(p: ExpDensity, v: FiberVector, grid: Optional[QuadratureGrid] = None) -> Curve:
    """t -> e^{t v - K_p(t v)} p for |t| <= 1."""
    grid = grid or p.grid
    v.check(grid)
    for s in (-1.0, 1.0):
        check_admissible(p.u + v.v * s)
    return Curve((v.v,), lambda t: [t], p, (-1.0, 1.0), dtheta=lambda t: [1.0], ddtheta=lambda t: [0.0], grid=grid)


class MixtureCurve:
    """t -> (1 - t) p + t q on [0, 1]."""

    def __init__(self, p: Density, q: Density):
        if p.dim != q.dim:
            raise ValueError("densities differ in dimension")
        self.p, self.q = p, q
        self.interval = (0.0, 1.0)

    def at(self, t: float) -> Density:
        if not 0 <= t <= 1:
            raise ValueError("mixture geodesic is only defined for t in [0, 1]")
        if t == 0:
            return self.p
        if t == 1:
            return self.q
        return MixtureDensity([(1 - t, self.p), (t, self.q)])

    def chart(self, t: float, grid: QuadratureGrid) -> ScalarField:
        return mix_chart(self.p, self.at(t), grid)

    def velocity(self, t: float) -> FiberVector:
        """d/dt log c(t) = (q - p) / c(t)."""
        c = self.at(t)
        p, q = self.p, self.q
        return FiberVector(c, FunctionField(p.dim, lambda x: (q.density(x) - p.density(x)) / c.density(x),
                                            name="mixture_velocity"))


def mixture_geodesic(p: Density, q: Density) -> MixtureCurve:
    return MixtureCurve(p, q)
