"""Young functions, their conjugates and squared variants, and domination probes.

Young functions act on [0, inf) and are evaluated on ``|x|`` when given signed
input. Conjugates are primitives of the inverse derivative, computed by a
vectorised adaptive Simpson rule.

Registry keys: ``power:p``, ``exp2``, ``cosh2``, ``gauss2``, ``conj:<key>``,
``sq:<key>``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import lambertw

SIMPSON_TOL = 1e-13
SIMPSON_MAX_DEPTH = 60


def adaptive_simpson(fn: Callable[[np.ndarray], np.ndarray], upper, lower=0.0, tol: float = SIMPSON_TOL,
                     max_depth: int = SIMPSON_MAX_DEPTH) -> np.ndarray:
    """``int_lower^upper fn`` for every entry of ``upper`` at once.

    Each integral is refined independently with relative tolerance ``tol``;
    accepted panels get the usual Richardson correction.
    """
    upper = np.asarray(upper, dtype=float)
    b = upper.ravel()
    a = np.broadcast_to(np.asarray(lower, dtype=float), upper.shape).ravel()
    result = np.zeros_like(b)
    owner = np.flatnonzero(b > a)
    if owner.size == 0:
        return result.reshape(upper.shape)
    lo = a[owner].copy()
    hi = b[owner]
    mid = 0.5 * (lo + hi)
    flo, fmid, fhi = fn(lo), fn(mid), fn(hi)
    whole = (hi - lo) / 6 * (flo + 4 * fmid + fhi)
    eps = tol * np.abs(whole) + 1e-300
    depth = 0
    while owner.size:
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = fn(lm), fn(rm)
        left = (mid - lo) / 6 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6 * (fmid + 4 * frm + fhi)
        delta = left + right - whole
        done = (np.abs(delta) <= 15 * eps) | (depth >= max_depth)
        if np.any(~np.isfinite(delta)):
            raise ArithmeticError("non-finite integrand in adaptive Simpson")
        np.add.at(result, owner[done], (left + right + delta / 15)[done])
        keep = ~done
        if not keep.any():
            break
        owner = np.concatenate([owner[keep], owner[keep]])
        lo, mid, hi = (np.concatenate([lo[keep], mid[keep]]),
                       np.concatenate([lm[keep], rm[keep]]),
                       np.concatenate([mid[keep], hi[keep]]))
        flo, fmid, fhi = (np.concatenate([flo[keep], fmid[keep]]),
                          np.concatenate([flm[keep], frm[keep]]),
                          np.concatenate([fmid[keep], fhi[keep]]))
        whole = np.concatenate([left[keep], right[keep]])
        eps = np.concatenate([eps[keep], eps[keep]]) / 2
        depth += 1
    return result.reshape(upper.shape)


def primitive(fn: Callable, y) -> np.ndarray:
    """``int_0^y fn`` for y >= 0, integrating once across the sorted gaps."""
    y = np.asarray(y, dtype=float)
    flat = y.ravel()
    if flat.size == 0:
        return y.copy()
    uniq, back = np.unique(flat, return_inverse=True)
    pieces = adaptive_simpson(fn, uniq, np.concatenate([[0.0], uniq[:-1]]))
    return np.cumsum(pieces)[back].reshape(y.shape)


def _monotone_inverse(fn: Callable, y) -> np.ndarray:
    # bisection for a continuous strictly increasing fn with fn(0) = 0
    y = np.asarray(y, dtype=float)
    hi = np.ones_like(y)
    for _ in range(1100):
        short = fn(hi) < y
        if not short.any():
            break
        hi = np.where(short, 2 * hi, hi)
    lo = np.zeros_like(y)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = fn(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 2e-16 * np.maximum(hi, 1e-300)):
            break
    return 0.5 * (lo + hi)


def _log_sinh(y):
    # log(sinh y) for y > 0 without overflow
    y = np.asarray(y, dtype=float)
    yb, ys = np.maximum(y, 20.0), np.minimum(y, 20.0)
    with np.errstate(divide="ignore"):
        small = np.log(np.sinh(ys))
    return np.where(y > 20, yb - math.log(2) + np.log1p(-np.exp(-2 * yb)), small)


def _log_expm1(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(s > 30, s + np.log1p(-np.exp(-np.maximum(s, 30))), np.log(np.expm1(np.minimum(s, 30))))


@dataclass(frozen=True, eq=False)
class YoungFunction:
    """Convex Phi on [0, inf) with Phi(0) = 0, derivative ``deriv`` and its inverse.

    ``growth`` is a function C with Phi(a x) <= C(a) Phi(x), when known.
    ``strict`` is False when the derivative is not a bijection of [0, inf)
    (e.g. ``power:1``), in which case no conjugate exists.
    """

    key: str
    value: Callable
    deriv: Callable
    deriv_inv: Optional[Callable] = None
    growth: Optional[Callable] = None
    log_value: Optional[Callable] = None
    conjugate_growth: Optional[Callable] = None
    strict: bool = True

    def __call__(self, x) -> np.ndarray:
        return self.value(np.abs(np.asarray(x, dtype=float)))

    def phi(self, x) -> np.ndarray:
        return self.deriv(np.abs(np.asarray(x, dtype=float)))

    def phi_inv(self, y) -> np.ndarray:
        if not self.strict:
            raise ValueError(f"derivative of {self.key} is not invertible")
        y = np.asarray(y, dtype=float)
        if self.deriv_inv is not None:
            return self.deriv_inv(y)
        return _monotone_inverse(self.deriv, y)

    def log(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        if self.log_value is not None:
            return self.log_value(x)
        with np.errstate(divide="ignore"):
            return np.log(self.value(x))

    def __repr__(self):
        return f"YoungFunction({self.key!r})"


def power(p: float) -> YoungFunction:
    """x^p / p; p = 1 gives the (non-strict) L1 gauge."""
    p = float(p)
    if p < 1:
        raise ValueError("power Young function needs p >= 1")
    key = f"power:{p:g}"
    if p == 1:
        return YoungFunction(key, lambda x: x, lambda x: np.ones_like(x), growth=lambda a: a,
                             log_value=lambda x: _safe_log(x), strict=False)
    return YoungFunction(
        key,
        value=lambda x: x ** p / p,
        deriv=lambda x: x ** (p - 1),
        deriv_inv=lambda y: y ** (1 / (p - 1)),
        growth=lambda a: a ** p,
        log_value=lambda x: p * _safe_log(x) - math.log(p),
    )


def _safe_log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _max_a_a2(a):
    a = np.asarray(a, dtype=float)
    return np.maximum(a, a * a)


def _exp2_value(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        series = x * x * (0.5 + x * (1 / 6 + x * (1 / 24 + x / 120)))
        return np.where(x < 1e-3, series, np.expm1(x) - x)


def _exp2_log(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        direct = np.log(_exp2_value(np.minimum(x, 30)))
        asym = x + np.log1p(-(1 + x) * np.exp(-np.maximum(x, 30)))
    return np.where(x > 30, asym, direct)


EXP2 = YoungFunction(
    "exp2",
    value=_exp2_value,
    deriv=lambda x: np.expm1(x),
    deriv_inv=lambda y: np.log1p(y),
    log_value=_exp2_log,
    conjugate_growth=_max_a_a2,
)

COSH2 = YoungFunction(
    "cosh2",
    value=lambda x: 2 * np.sinh(np.asarray(x) / 2) ** 2,
    deriv=np.sinh,
    deriv_inv=np.arcsinh,
    log_value=lambda x: math.log(2) + 2 * _log_sinh(np.asarray(x) / 2),
    conjugate_growth=_max_a_a2,
)


def _gauss2_deriv_inv(y):
    # x e^{x^2/2} = y  <=>  x^2 = W(y^2)
    y = np.asarray(y, dtype=float)
    return np.sqrt(np.real(lambertw(y * y)))


GAUSS2 = YoungFunction(
    "gauss2",
    value=lambda x: np.expm1(np.asarray(x) ** 2 / 2),
    deriv=lambda x: x * np.exp(np.asarray(x) ** 2 / 2),
    deriv_inv=_gauss2_deriv_inv,
    log_value=lambda x: _log_expm1(np.asarray(x) ** 2 / 2),
)


def conjugate(phi: YoungFunction) -> YoungFunction:
    """Psi(y) = int_0^y phi'^{-1}(v) dv."""
    if not phi.strict:
        raise ValueError(f"derivative of {phi.key} is not invertible; no conjugate Young function")
    inv = phi.phi_inv
    key = phi.key[5:] if phi.key.startswith("conj:") else "conj:" + phi.key
    return YoungFunction(
        key,
        value=lambda y: primitive(inv, y),
        deriv=inv,
        deriv_inv=phi.deriv,
        growth=phi.conjugate_growth,
        conjugate_growth=phi.growth,
    )


def squared_young(phi: YoungFunction) -> YoungFunction:
    """x -> Phi(x^2), again a Young function."""
    growth = None
    if phi.growth is not None:
        growth = lambda a, g=phi.growth: g(np.asarray(a, dtype=float) ** 2)  # noqa: E731
    return YoungFunction(
        "sq:" + phi.key,
        value=lambda x: phi.value(np.asarray(x) ** 2),
        deriv=lambda x: 2 * x * phi.deriv(np.asarray(x) ** 2),
        log_value=lambda x: phi.log(np.asarray(x) ** 2),
        growth=growth,
    )


@functools.lru_cache(maxsize=None)
def young(key: str) -> YoungFunction:
    """Look up a Young function by registry key."""
    key = key.strip()
    if key.startswith("conj:"):
        return conjugate(young(key[5:]))
    if key.startswith("sq:"):
        return squared_young(young(key[3:]))
    if key.startswith("power:"):
        try:
            p = float(key[6:])
        except ValueError:
            raise KeyError(f"bad power exponent in {key!r}") from None
        return power(p)
    named = {"exp2": EXP2, "cosh2": COSH2, "gauss2": GAUSS2}
    if key not in named:
        raise KeyError(f"unknown Young function key {key!r}")
    return named[key]


@dataclass(frozen=True)
class Domination:
    verdict: str  # "yes" or "undetermined"
    kappa: Optional[float] = None
    x_bar: Optional[float] = None

    def __bool__(self):
        return self.verdict == "yes"


def eventually_dominates(phi1: YoungFunction, phi2: YoungFunction, max_power: int = 20,
                         x_bars=(1.0, 2.0, 4.0, 8.0), x_max: float = 1e4, n_probe: int = 200) -> Domination:
    """Search a witness (kappa, x_bar) with phi1(x) <= phi2(kappa x) on probes x in [x_bar, x_max].

    Probe based: a failed search is reported as undetermined, never as "no".
    Comparison is in log space so overflow cannot fake a witness.
    """
    for j in range(max_power + 1):
        kappa = 2.0 ** j
        for x_bar in x_bars:
            x = np.geomspace(x_bar, x_max, n_probe)
            lhs = phi1.log(x)
            rhs = phi2.log(kappa * x)
            if np.all(lhs <= rhs + 1e-12 * np.abs(rhs)):
                return Domination("yes", kappa, x_bar)
    return Domination("undetermined")
