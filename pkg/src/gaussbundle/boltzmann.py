"""Monte Carlo for the space-homogeneous Boltzmann operator with kernel |x . (v - w)|.

Densities ``f`` are relative to the standard Gaussian on R^3; the Lebesgue
density is F = f * gamma_3. Since |v_x|^2 + |w_x|^2 = |v|^2 + |w|^2, the
Gaussian factors cancel: gamma(v_x) gamma(w_x) = gamma(v) gamma(w). Sphere
averages use the uniform probability measure on S^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .expfamily import Density
from .sampling import GaussianSampler

UNIT_TOL = 1e-12
ROUNDOFF_FLOOR = 1e-12


@dataclass(frozen=True)
class CollisionPair:
    v: np.ndarray
    w: np.ndarray
    x: np.ndarray
    v_x: np.ndarray
    w_x: np.ndarray

    def momentum_error(self) -> np.ndarray:
        return np.max(np.abs(self.v_x + self.w_x - self.v - self.w), axis=-1)

    def energy_error(self) -> np.ndarray:
        sq = lambda a: np.sum(a * a, axis=-1)  # noqa: E731
        return np.abs(sq(self.v_x) + sq(self.w_x) - sq(self.v) - sq(self.w))


def post_collision(v, w, x, check: bool = True) -> CollisionPair:
    """v_x = v - x x'(v - w), w_x = w + x x'(v - w); batched over leading axes."""
    v, w, x = (np.asarray(a, dtype=float) for a in (v, w, x))
    if np.any(np.abs(np.linalg.norm(x, axis=-1) - 1) > UNIT_TOL):
        raise ValueError("collision direction must be a unit vector")
    a = np.sum(x * (v - w), axis=-1)[..., None]
    pair = CollisionPair(v, w, x, v - a * x, w + a * x)
    if check:
        scale = 1 + np.sum(v * v, axis=-1) + np.sum(w * w, axis=-1)
        if np.any(pair.energy_error() > 1e-12 * scale) or np.any(pair.momentum_error() > 1e-12 * np.sqrt(scale)):
            raise ArithmeticError("collision kinematics lost conservation beyond round-off")
    return pair


def gaussian3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.exp(-0.5 * np.sum(v * v, axis=-1)) / (2 * math.pi) ** 1.5


@dataclass(frozen=True)
class McEstimate:
    value: float
    se: float
    count: int
    seed: int

    @classmethod
    def from_samples(cls, samples: np.ndarray, seed: int) -> "McEstimate":
        samples = np.asarray(samples, dtype=float)
        if not np.all(np.isfinite(samples)):
            raise ArithmeticError("non-finite Monte Carlo sample (density ratio overflow)")
        n = samples.size
        se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        return cls(float(np.mean(samples)), se, n, seed)

    def within(self, target: float = 0.0, k: float = 3.0, floor: float = ROUNDOFF_FLOOR) -> bool:
        return abs(self.value - target) <= k * self.se + floor


def _density(f) -> Callable[[np.ndarray], np.ndarray]:
    if f is None:
        return lambda x: np.ones(x.shape[:-1])
    if isinstance(f, Density):
        return f.density
    return f


def _check_dim(sampler: GaussianSampler):
    if sampler.dim != 3:
        raise ValueError("Boltzmann sampling needs a 3-dimensional sampler")


def collision_q(f: Optional[Density], v, sampler: GaussianSampler, n: int) -> McEstimate:
    """Q(f)(v) with w ~ gamma_3 and x uniform on the sphere.

    Per-sample value gamma(v) [f(v_x) f(w_x) - f(v) f(w)] |x . (v - w)|.
    """
    _check_dim(sampler)
    dens = _density(f)
    v = np.asarray(v, dtype=float).reshape(3)
    w = sampler.sample(n)
    x = sampler.sphere(n)
    vv = np.broadcast_to(v, w.shape)
    pair = post_collision(vv, w, x)
    kernel = np.abs(np.sum(x * (vv - w), axis=-1))
    gain = dens(pair.v_x) * dens(pair.w_x)
    loss = dens(vv) * dens(w)
    return McEstimate.from_samples(gaussian3(v) * (gain - loss) * kernel, sampler.seed)


def _draw_triples(sampler: GaussianSampler, n: int):
    v = sampler.sample(n)
    w = sampler.sample(n)
    x = sampler.sphere(n)
    return post_collision(v, w, x)


INVARIANTS = {
    "mass": lambda v: np.ones(v.shape[:-1]),
    "momentum_1": lambda v: v[..., 0],
    "momentum_2": lambda v: v[..., 1],
    "momentum_3": lambda v: v[..., 2],
    "energy": lambda v: np.sum(v * v, axis=-1),
}


@dataclass(frozen=True)
class ConservationReport:
    symmetrized: dict  # name -> McEstimate
    raw: dict  # name -> McEstimate, plain estimator of int Q(f) phi dv
    entropy: McEstimate  # int Q(f) log F dv, should be <= 0

    def passed(self) -> bool:
        ok = all(e.within() for e in self.symmetrized.values()) and all(e.within() for e in self.raw.values())
        return ok and self.entropy.value <= 3 * self.entropy.se + ROUNDOFF_FLOOR


def conservation_check(f: Optional[Density], sampler: GaussianSampler, n: int) -> ConservationReport:
    """int Q(f) phi dv for the five collision invariants, plus the entropy production sign.

    With v, w ~ gamma_3 the raw per-sample value is
    (f(v_x) f(w_x) - f(v) f(w)) |x . (v - w)| phi(v); the symmetrised one
    averages over v <-> w and pre <-> post, giving
    1/4 (f' f'_* - f f_*) |a| (phi + phi_* - phi' - phi'_*).
    """
    _check_dim(sampler)
    dens = _density(f)
    pair = _draw_triples(sampler, n)
    fv, fw, fvx, fwx = dens(pair.v), dens(pair.w), dens(pair.v_x), dens(pair.w_x)
    kernel = np.abs(np.sum(pair.x * (pair.v - pair.w), axis=-1))
    jump = (fvx * fwx - fv * fw) * kernel
    sym, raw = {}, {}
    for name, phi in INVARIANTS.items():
        bracket = phi(pair.v) + phi(pair.w) - phi(pair.v_x) - phi(pair.w_x)
        sym[name] = McEstimate.from_samples(0.25 * jump * bracket, sampler.seed)
        raw[name] = McEstimate.from_samples(jump * phi(pair.v), sampler.seed)
    with np.errstate(divide="ignore"):
        logs = [np.log(d) for d in (fv, fw, fvx, fwx)]
    ent = 0.25 * jump * (logs[0] + logs[1] - logs[2] - logs[3])
    return ConservationReport(sym, raw, McEstimate.from_samples(ent, sampler.seed))


def _lebedev26():
    pts, wts = [], []
    for i in range(3):
        for s in (1.0, -1.0):
            p = np.zeros(3)
            p[i] = s
            pts.append(p)
            wts.append(1 / 21)
    r2 = 1 / math.sqrt(2)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for si in (1.0, -1.0):
            for sj in (1.0, -1.0):
                p = np.zeros(3)
                p[i], p[j] = si * r2, sj * r2
                pts.append(p)
                wts.append(4 / 105)
    r3 = 1 / math.sqrt(3)
    for sx in (1.0, -1.0):
        for sy in (1.0, -1.0):
            for sz in (1.0, -1.0):
                pts.append(np.array([sx, sy, sz]) * r3)
                wts.append(9 / 280)
    return np.array(pts), np.array(wts)


SPHERE_RULE = _lebedev26()


def sphere_rule(kind: str = "lebedev26", sampler: Optional[GaussianSampler] = None, n: int = 10_000):
    """(points, weights) on S^2 summing to 1; the 26-point rule is exact to degree 7."""
    if kind == "lebedev26":
        return SPHERE_RULE
    if kind == "mc":
        if sampler is None:
            raise ValueError("Monte Carlo sphere rule needs a sampler")
        return sampler.sphere(n), np.full(n, 1.0 / n)
    raise ValueError(f"unknown sphere rule {kind!r}")


def weak_form_a(g: Callable, v, w, rule=None) -> np.ndarray:
    """A g(v, w) = avg_x 1/2 (g(v_x) + g(w_x)) - 1/2 (g(v) + g(w)); batched over v, w."""
    pts, wts = rule if rule is not None else SPHERE_RULE
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    vb, wb = v[..., None, :], w[..., None, :]
    pair = post_collision(np.broadcast_to(vb, vb.shape[:-2] + pts.shape), np.broadcast_to(wb, wb.shape[:-2] + pts.shape),
                          np.broadcast_to(pts, vb.shape[:-2] + pts.shape))
    after = 0.5 * (g(pair.v_x) + g(pair.w_x)) @ wts
    return after - 0.5 * (g(v) + g(w))


@dataclass(frozen=True)
class WeakIdentityReport:
    lhs: McEstimate  # <g, Q(f)/f>_f = int g Q(f) dv
    rhs: McEstimate  # E_{f x f}[kernel-weighted A g]
    paired: McEstimate  # per-sample lhs - rhs on shared draws
    rhs_unweighted: McEstimate  # reading without the kernel weight

    @property
    def combined_se(self) -> float:
        return math.hypot(self.lhs.se, self.rhs.se)

    @property
    def difference(self) -> float:
        return self.lhs.value - self.rhs.value

    def passed(self, k: float = 3.0) -> bool:
        return abs(self.difference) <= k * self.combined_se + ROUNDOFF_FLOOR

    @property
    def unweighted_discrepancy(self) -> float:
        return abs(self.lhs.value - self.rhs_unweighted.value)


def weak_identity_check(f: Optional[Density], g: Callable, sampler: GaussianSampler, n: int) -> WeakIdentityReport:
    """Both sides of the weak form on shared draws v, w ~ gamma_3, x uniform."""
    _check_dim(sampler)
    dens = _density(f)
    pair = _draw_triples(sampler, n)
    fv, fw = dens(pair.v), dens(pair.w)
    kernel = np.abs(np.sum(pair.x * (pair.v - pair.w), axis=-1))
    left = (dens(pair.v_x) * dens(pair.w_x) - fv * fw) * kernel * g(pair.v)
    a = 0.5 * (g(pair.v_x) + g(pair.w_x)) - 0.5 * (g(pair.v) + g(pair.w))
    right = fv * fw * kernel * a
    seed = sampler.seed
    return WeakIdentityReport(McEstimate.from_samples(left, seed), McEstimate.from_samples(right, seed),
                              McEstimate.from_samples(left - right, seed),
                              McEstimate.from_samples(fv * fw * a, seed))
