"""Gaussian Poincare-type, Orlicz-Sobolev and covariance inequalities, checked numerically."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as sp_integrate
from scipy.special import gamma as gamma_fn

from .expfamily import ExpDensity
from .fields import ScalarField, grad_norm_field
from .hermite import HermiteField, multi_factorial
from .orlicz import NormOverflow, TailFit, dual_norm, fit_exponential_tail, luxemburg_norm
from .quadrature import IntegrandOverflow, QuadratureGrid, gauss_grid
from .sampling import GaussianSampler
from .young import YoungFunction, young

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class InequalityResult:
    """lhs <= rhs check; ``passed`` iff rhs - lhs >= -tolerance (tolerance is absolute)."""

    name: str
    lhs: float
    rhs: float
    constant: Optional[float] = None
    tolerance: float = 0.0
    skipped: bool = False
    note: str = ""

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        if self.skipped:
            return True
        return bool(self.slack >= -self.tolerance)


def _skip(name: str, note: str) -> InequalityResult:
    return InequalityResult(name, math.nan, math.nan, skipped=True, note=note)


def _centered_values(f: ScalarField, grid: QuadratureGrid) -> np.ndarray:
    v = f(grid.nodes)
    return v - grid.expect(v)


def _grad_sq(f: ScalarField, grid: QuadratureGrid) -> np.ndarray:
    g = f.grad(grid.nodes)
    return np.sum(g * g, axis=-1)


def gauss_poincare(f: ScalarField, grid: QuadratureGrid, tol: float = 1e-10) -> InequalityResult:
    """Var(f) <= E|grad f|^2."""
    c = _centered_values(f, grid)
    return InequalityResult("gauss_poincare", grid.expect(c * c), grid.expect(_grad_sq(f, grid)), 1.0, tol)


def _converged_1d(fn: Callable[[np.ndarray], np.ndarray], orders=(80, 160), rtol: float = 1e-6) -> float:
    vals = []
    for m in orders:
        g = gauss_grid(1, m)
        with np.errstate(over="ignore", invalid="ignore"):
            y = fn(g.nodes[:, 0])
        if not np.all(np.isfinite(y)):
            raise IntegrandOverflow("integrand overflows at a quadrature node")
        vals.append(float(np.sum(g.weights * y)))
    a, b = vals
    if abs(b - a) > rtol * max(abs(b), 1e-300):
        raise IntegrandOverflow("Gaussian integral does not converge under refinement; likely infinite")
    return b


def tilde_phi(phi: Callable, a: float) -> float:
    """int Phi((pi/2) a z) gamma(dz); raises IntegrandOverflow when it is not finite."""
    if a == 0:
        return float(np.asarray(phi(np.zeros(1)))[0])
    return _converged_1d(lambda z: phi(HALF_PI * a * z))


def gaussian_abs_moment(r: float, order: int = 100) -> float:
    """m(r) = E|Z|^r by one-dimensional Gauss-Hermite quadrature."""
    g = gauss_grid(1, order)
    return float(np.sum(g.weights * np.abs(g.nodes[:, 0]) ** r))


def gaussian_abs_moment_exact(r: float) -> float:
    return 2 ** (r / 2) * gamma_fn((r + 1) / 2) / math.sqrt(math.pi)


def lp_constant(p: float) -> float:
    """C_2(p) = (pi/2) m(2p)^{1/(2p)}, with m from its gamma-function closed form."""
    return HALF_PI * gaussian_abs_moment_exact(2 * p) ** (1 / (2 * p))


def lp_poincare(f: ScalarField, p: float, grid: QuadratureGrid, rtol: float = 1e-8) -> InequalityResult:
    """||f - Ef||_{2p} <= C_2(p) || |grad f| ||_{2p}."""
    if p <= 0.5:
        raise ValueError("lp_poincare needs p > 1/2")
    q = 2 * p
    c = _centered_values(f, grid)
    lhs = grid.expect(np.abs(c) ** q) ** (1 / q)
    grad = grid.expect(_grad_sq(f, grid) ** (q / 2)) ** (1 / q)
    C = lp_constant(p)
    rhs = C * grad
    return InequalityResult(f"lp_poincare(p={p:g})", lhs, rhs, C, rtol * max(abs(rhs), abs(lhs)))


def lipschitz_mgf(f: ScalarField, kappa: float, grid: QuadratureGrid, rtol: float = 1e-8) -> InequalityResult:
    """E exp((2 kappa/pi)(f - Ef)) <= E exp((kappa^2/2)|grad f|^2)."""
    c = _centered_values(f, grid)
    with np.errstate(over="ignore"):
        rhs_vals = np.exp(0.5 * kappa ** 2 * _grad_sq(f, grid))
        lhs_vals = np.exp(2 * kappa / math.pi * c)
    if not np.all(np.isfinite(rhs_vals)) or not np.all(np.isfinite(lhs_vals)):
        raise IntegrandOverflow("moment generating function overflows on the grid; reduce kappa")
    lhs, rhs = grid.expect(lhs_vals), grid.expect(rhs_vals)
    return InequalityResult(f"lipschitz_mgf(kappa={kappa:g})", lhs, rhs, 2 * kappa / math.pi, rtol * max(lhs, rhs))


def _finite_norm(values_field: ScalarField, phi: YoungFunction, grid: QuadratureGrid, rtol: float = 1e-6) -> float:
    """Luxemburg norm, cross-checked against refined grids in low dimension.

    Orders m, 2m, 4m: the first pair that agrees to ``rtol`` gives the value
    at the finer order; a norm that keeps moving is reported as not finite.
    """
    a = luxemburg_norm(values_field, phi, grid)
    if grid.dim > 2:
        return a
    for k in (2, 4):
        b = luxemburg_norm(values_field, phi, gauss_grid(grid.dim, k * grid.order))
        if abs(a - b) <= rtol * max(abs(b), 1e-300):
            return b if k > 2 else a
        a = b
    raise NormOverflow("norm not finite on this grid (changes under refinement)")


def cosh_poincare(f: ScalarField, grid: QuadratureGrid, rtol: float = 1e-6) -> InequalityResult:
    """||f - Ef||_{cosh2} <= (pi/2) || |grad f| ||_{gauss2}; skipped when the rhs norm is not finite."""
    try:
        g2 = _finite_norm(grad_norm_field(f), young("gauss2"), grid)
    except (NormOverflow, IntegrandOverflow, ValueError) as exc:
        return _skip("cosh_poincare", str(exc))
    lhs = luxemburg_norm(_centered_values(f, grid), young("cosh2"), grid)
    rhs = HALF_PI * g2
    return InequalityResult("cosh_poincare", lhs, rhs, HALF_PI, rtol * max(lhs, rhs))


def _llogl_growth_integral(kappa: float) -> float:
    # int max(s|z|, s^2 z^2) gamma(dz), s = (pi/2) kappa, split at |z| = 1/s
    s = HALF_PI * kappa
    if s == 0:
        return 0.0
    dens = lambda z: math.exp(-z * z / 2) / math.sqrt(2 * math.pi)  # noqa: E731
    inner, _ = sp_integrate.quad(lambda z: s * z * dens(z), 0, 1 / s, epsabs=1e-14, epsrel=1e-13)
    outer, _ = sp_integrate.quad(lambda z: (s * z) ** 2 * dens(z), 1 / s, np.inf, epsabs=1e-14, epsrel=1e-13)
    return 2 * (inner + outer)


@functools.lru_cache(maxsize=8)
def llogl_kappa(width: float = 1e-10) -> float:
    """Largest kappa with int C((pi/2) kappa z) gamma(dz) <= 1, C(a) = max(a, a^2)."""
    lo, hi = 0.0, 2 / math.pi
    if _llogl_growth_integral(hi) <= 1:
        raise ValueError("no admissible kappa bracket")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _llogl_growth_integral(mid) <= 1:
            lo = mid
        else:
            hi = mid
    if lo == 0:
        raise ValueError("no admissible kappa found")
    return lo


def llogl_poincare(f: ScalarField, grid: QuadratureGrid, rtol: float = 1e-6,
                   kappa: Optional[float] = None) -> InequalityResult:
    """||f - Ef||_{(exp2)*} <= C_1 || |grad f| ||_{(exp2)*} with C_1 = 1/kappa."""
    kappa = llogl_kappa() if kappa is None else kappa
    C1 = 1 / kappa
    psi = young("conj:exp2")
    lhs = luxemburg_norm(_centered_values(f, grid), psi, grid)
    rhs = C1 * luxemburg_norm(grad_norm_field(f), psi, grid)
    return InequalityResult("llogl_poincare", lhs, rhs, C1, rtol * max(lhs, rhs))


def covariance_ou(f: HermiteField, g: HermiteField) -> tuple:
    """(sum_{a != 0} a! f_a g_a, int_0^inf e^{-t} E[P_t grad f . grad g] dt), both exact."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    exact = sum(multi_factorial(a) * c * g.coeffs.get(a, 0.0) for a, c in f.coeffs.items() if sum(a) > 0)
    integral = 0.0
    for i in range(f.dim):
        df, dg = f.partial(i), g.partial(i)
        for b, c in df.coeffs.items():
            # e^{-t} e^{-|b| t} integrates to 1 / (1 + |b|)
            integral += multi_factorial(b) * c * dg.coeffs.get(b, 0.0) / (1 + sum(b))
    return exact, integral


def covariance_bound(f: ScalarField, g: ScalarField, phi: YoungFunction | str, grid: QuadratureGrid,
                     norms: tuple = ("l2", "l2"), tol: float = 1e-6) -> InequalityResult:
    """|cov(f, g)| <= || |grad f|_1 ||_Phi * || |grad g|_2 ||_{Psi,*}."""
    if tuple(norms) not in {("l2", "l2"), ("l1", "linf"), ("linf", "l1")}:
        raise ValueError("vector norms must be a dual pair: (l2, l2) or (l1, linf)")
    phi = young(phi) if isinstance(phi, str) else phi
    fv, gv = f(grid.nodes), g(grid.nodes)
    lhs = abs(grid.expect(fv * gv) - grid.expect(fv) * grid.expect(gv))
    a = luxemburg_norm(grad_norm_field(f, norms[0]), phi, grid)
    b = dual_norm(grad_norm_field(g, norms[1]), phi, grid)
    rhs = a * b
    return InequalityResult(f"covariance_bound({phi.key},{norms[0]}/{norms[1]})", lhs, rhs, 1.0,
                            tol * max(1.0, rhs))


def chi2_bound(p, grid: QuadratureGrid, tol: float = 1e-8) -> InequalityResult:
    """int (p - 1)^2 dgamma <= int (delta . grad p)^2 dgamma, delta . grad p = x . grad p - lap p.

    ``p`` is a density relative to the Gaussian: an ExpDensity or a field
    (typically a HermiteField) that is positive at every node.
    """
    field = p.as_field() if isinstance(p, ExpDensity) else p
    if isinstance(field, HermiteField):
        if abs(field.mean - 1) > 1e-12:
            raise ValueError("Hermite density must have constant coefficient 1")
        if field.degree % 2 == 1:
            raise ValueError("odd-degree Hermite expansion is negative somewhere; not a density")
    x = grid.nodes
    vals = field(x)
    if np.any(vals <= 0):
        raise ValueError("density is not positive at every quadrature node")
    lhs = grid.expect((vals - 1) ** 2)
    stein = np.sum(x * field.grad(x), axis=-1) - field.laplacian(x)
    rhs = grid.expect(stein ** 2)
    return InequalityResult("chi2_bound", lhs, rhs, 1.0, tol * max(1.0, rhs))


@dataclass
class LlnReport:
    target: float
    schedule: tuple
    means: tuple  # replica-averaged estimates per N
    rms_errors: tuple
    tail: Optional[TailFit] = None
    replicas: int = 0
    notes: list = field(default_factory=list)

    def rate_ratios(self) -> np.ndarray:
        """RMS(N_k) / RMS(N_{k+1}); about sqrt(2) for a doubling schedule."""
        r = np.asarray(self.rms_errors)
        return r[:-1] / r[1:]


def lln_demo(f: ScalarField, p, sampler: GaussianSampler, schedule: Sequence[int] = tuple(2 ** k for k in range(6, 13)),
             replicas: int = 200, grid: Optional[QuadratureGrid] = None) -> LlnReport:
    """Self-normalised importance-sampling means of f under p, drawing from the Gaussian.

    Replica errors are pooled after scaling by sqrt(N) and fed to an
    exponential tail fit.
    """
    if not f.certificate().kind == "bounded":
        raise ValueError("lln_demo needs a bounded field")
    density = p.density if p is not None else (lambda x: np.ones(x.shape[:-1]))
    grid = grid or gauss_grid(f.dim)
    dens = density(grid.nodes)
    target = grid.expect(f(grid.nodes) * dens) / grid.expect(dens)
    means, rms, pooled = [], [], []
    for n in schedule:
        x = sampler.sample(n * replicas).reshape(replicas, n, f.dim)
        w = density(x)
        w = w / np.sum(w, axis=1, keepdims=True)
        est = np.sum(f(x) * w, axis=1)
        err = est - target
        means.append(float(np.mean(est)))
        rms.append(float(np.sqrt(np.mean(err ** 2))))
        pooled.append(np.sqrt(n) * err)
    report = LlnReport(target, tuple(schedule), tuple(means), tuple(rms), replicas=replicas)
    dev = np.concatenate(pooled)
    if np.ptp(np.abs(dev)) > 0:
        report.tail = fit_exponential_tail(dev)
    else:
        report.notes.append("all replica errors vanish; no tail to fit")
    return report
