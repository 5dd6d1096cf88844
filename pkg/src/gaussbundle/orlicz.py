"""Luxemburg and Orlicz (Amemiya) norms on the Gaussian space, and tail fits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import ScalarField
from .quadrature import QuadratureGrid
from .sampling import GaussianSampler
from .young import YoungFunction, conjugate

MAX_ITER = 200
_GOLDEN = (math.sqrt(5) - 1) / 2


class NormOverflow(ArithmeticError):
    """The modular stayed non-finite over the whole bracket search."""


def _abs_values(f, grid: QuadratureGrid) -> np.ndarray:
    if isinstance(f, ScalarField):
        if f.dim != grid.dim:
            raise ValueError(f"field dim {f.dim} does not match grid dim {grid.dim}")
        v = f(grid.nodes)
    else:
        v = np.asarray(f, dtype=float)
    v = np.abs(v)
    if not np.all(np.isfinite(v)):
        raise ValueError("field is not finite at every node")
    return v


def modular(values: np.ndarray, weights: np.ndarray, phi: YoungFunction, scale: float) -> float:
    """``int Phi(|f| / scale) dgamma`` on the grid; +inf on overflow."""
    with np.errstate(over="ignore", invalid="ignore"):
        total = float(np.sum(weights * phi(values / scale)))
    if math.isnan(total):
        return math.inf
    return total


def luxemburg_norm(f, phi: YoungFunction, grid: QuadratureGrid) -> float:
    """inf{a > 0 : int Phi(|f|/a) dgamma <= 1} by bracketing and bisection.

    ``f`` is a ScalarField or an array of node values.
    """
    v = _abs_values(f, grid)
    w = grid.weights
    if not np.any(v * (w > 0)):
        return 0.0
    G = lambda a: modular(v, w, phi, a)  # noqa: E731
    a = float(v.max())
    it = 0
    if G(a) > 1:
        lo = a
        while G(a) > 1:
            lo, a = a, 2 * a
            it += 1
            if it > MAX_ITER:
                raise NormOverflow(f"{phi.key} modular exceeds 1 at every tested scale")
        hi = a
    else:
        hi = a
        while G(a) <= 1:
            hi, a = a, a / 2
            it += 1
            if it > MAX_ITER:
                raise NormOverflow("bracket search failed")
        lo = a
    while it < MAX_ITER:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if G(mid) > 1:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi)


def dual_norm(f, phi: YoungFunction, grid: QuadratureGrid, rtol: float = 1e-10) -> float:
    """Orlicz norm of ``f`` dual to the Luxemburg norm of ``phi``.

    sup{int f g dgamma : int Phi(|g|) dgamma <= 1}, evaluated through the
    Amemiya formula inf_k (1 + int Phi*(k|f|) dgamma) / k with a golden-section
    search in log k.
    """
    v = _abs_values(f, grid)
    w = grid.weights
    if not np.any(v * (w > 0)):
        return 0.0
    psi = conjugate(phi)

    def J(s):
        k = math.exp(s)
        with np.errstate(over="ignore", invalid="ignore"):
            total = float(np.sum(w * psi(k * v)))
        return (1 + total) / k if math.isfinite(total) else math.inf

    # k ~ 1/|f|_Psi sits near the minimiser
    s0 = -math.log(luxemburg_norm(v, psi, grid))
    step = math.log(2)
    left, mid, right = s0 - step, s0, s0 + step
    jl, jm, jr = J(left), J(mid), J(right)
    for _ in range(MAX_ITER):
        if jm <= jl and jm <= jr:
            break
        if jl < jm:
            right, jr, mid, jm = mid, jm, left, jl
            left = mid - step
            jl = J(left)
        else:
            left, jl, mid, jm = mid, jm, right, jr
            right = mid + step
            jr = J(right)
    else:
        raise NormOverflow("Amemiya objective has no interior minimum")
    a, b = left, right
    c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    jc, jd = J(c), J(d)
    while b - a > rtol:
        if jc <= jd:
            b, d, jd = d, c, jc
            c = b - _GOLDEN * (b - a)
            jc = J(c)
        else:
            a, c, jc = c, d, jd
            d = a + _GOLDEN * (b - a)
            jd = J(d)
    return min(jc, jd, jm)


@dataclass(frozen=True)
class TailFit:
    """Fit of P(|f| >= t) <= C1 exp(-C2 t) on the upper tail of a sample."""

    c1: float
    c2: float
    residual: float
    r_squared: float
    thresholds: tuple
    log_survival: tuple
    infinite_decay: bool

    @property
    def bound(self):
        return lambda t: self.c1 * np.exp(-self.c2 * np.asarray(t))


def fit_exponential_tail(values, min_exceed: int = 10, levels_per_octave: int = 2) -> TailFit:
    """Least-squares fit of log-survival against quantile-spaced thresholds.

    Thresholds sit at survival levels 2^{-j/levels_per_octave}; only levels
    with at least ``min_exceed`` exceedances are used and the fit runs on the
    upper half of them (the linear tail). A tail squeezed against a hard sup
    (relative spread of the fitted thresholds below 2%) is flagged as
    ``infinite_decay``.
    """
    x = np.sort(np.abs(np.asarray(values, dtype=float)))
    n = x.size
    if n < 2 or x[0] == x[-1]:
        raise ValueError("degenerate sample: constant field has no tail")
    levels = []
    j = 1
    while n * 2.0 ** (-j / levels_per_octave) >= min_exceed:
        levels.append(2.0 ** (-j / levels_per_octave))
        j += 1
    if len(levels) < 4:
        raise ValueError("sample too small for a tail fit")
    t = np.quantile(x, 1 - np.array(levels))
    surv = np.array([np.count_nonzero(x >= ti) / n for ti in t])
    half = len(t) // 2
    tt, ls = t[half:], np.log(surv[half:])
    spread = (tt[-1] - tt[0]) / max(abs(tt[-1]), 1e-300)
    if spread < 0.02:
        return TailFit(math.nan, math.inf, 0.0, 1.0, tuple(tt), tuple(ls), True)
    A = np.column_stack([np.ones_like(tt), -tt])
    coef, *_ = np.linalg.lstsq(A, ls, rcond=None)
    fitted = A @ coef
    resid = float(np.sqrt(np.mean((ls - fitted) ** 2)))
    ss_tot = float(np.sum((ls - ls.mean()) ** 2))
    r2 = 1 - float(np.sum((ls - fitted) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    # shift the intercept so the bound dominates every fitted point
    c2 = float(coef[1])
    c1 = float(np.exp(np.max(ls + c2 * tt)))
    return TailFit(c1, c2, resid, r2, tuple(tt), tuple(ls), False)


def tail_fit(f: ScalarField, sampler: GaussianSampler, n: int) -> TailFit:
    if n < 10_000:
        raise ValueError("tail_fit needs at least 1e4 samples")
    return fit_exponential_tail(f(sampler.sample(n)))
