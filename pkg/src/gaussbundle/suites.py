"""Verification suites: seeded corpora run through every identity and inequality."""
from __future__ import annotations

import math
from typing import Callable, Dict, List

import numpy as np

from . import applications as app
from . import boltzmann as bz
from . import inequalities as ineq
from .bundle import (Curve, FiberVector, acceleration, duality_check, e_transport, geodesic, m_transport,
                     mixture_geodesic, sup_norm, velocity)
from .corpus import corpus_fields, random_hermite, random_tilt, rng_for
from .expfamily import ExpDensity, cumulant, exp_chart, exp_chart_inverse, mix_chart, shift_field
from .fieldspec import parse_field
from .hermite import HermiteField, multi_indices, unit
from .quadrature import gauss_grid
from .report import Check, equal_check, le_check
from .sampling import GaussianSampler

N_CASES = 20
TILT_KINDS = ("mixed", "bounded", "quadratic", "linear")


def _sup(values) -> float:
    return float(np.max(np.abs(values)))


def _scale(*arrays) -> float:
    return max(1.0, *(_sup(a) for a in arrays))


def _centred_fiber(p, field, grid) -> FiberVector:
    return FiberVector(p, shift_field(field, p.expect(field, grid)))


def _ineq_check(res: ineq.InequalityResult, name: str, ts: float) -> Check:
    if res.skipped:
        return Check(name, math.nan, passed=True, note="skipped: " + res.note)
    return le_check(name, res.lhs, res.rhs, res.tolerance * ts,
                    note="" if res.constant is None else f"constant={res.constant:.17g}")


def suite_transports(dim: int, order: int, seed: int, ts: float = 1.0) -> List[Check]:
    grid = gauss_grid(dim, order)
    out = []
    for k in range(N_CASES):
        rng = rng_for(seed, 100 + k)
        mu, nu, rho = (ExpDensity(random_tilt(dim, rng, TILT_KINDS[(k + j) % 4]), grid) for j in range(3))
        u = _centred_fiber(mu, random_hermite(dim, 3, rng, 0.5, 1), grid)
        v = _centred_fiber(mu, random_hermite(dim, 3, rng, 0.5, 1), grid)
        tag = f"transports/case{k:02d}"
        for kind, T in (("e", e_transport), ("m", m_transport)):
            direct = T(mu, rho, u, grid).values(grid)
            chained = T(nu, rho, T(mu, nu, u, grid), grid).values(grid)
            out.append(equal_check(f"{tag}/{kind}_cocycle", _sup(chained - direct), 0.0,
                                   1e-10 * ts * _scale(direct)))
            same = T(mu, mu, u, grid).values(grid)
            out.append(equal_check(f"{tag}/{kind}_identity", _sup(same - u.values(grid)), 0.0, 1e-10 * ts * _scale(same)))
            moved = T(mu, nu, u, grid)
            out.append(equal_check(f"{tag}/{kind}_centering", nu.expect(moved.v, grid), 0.0, 1e-9 * ts))
        rep = duality_check(mu, nu, u, v, grid)
        out.append(equal_check(f"{tag}/duality", rep.lhs, rep.rhs, 1e-8 * ts))
        out.append(equal_check(f"{tag}/inner_transport", rep.inner_lhs, rep.inner_rhs, 1e-8 * ts))
    return out


def suite_charts(dim: int, order: int, seed: int, ts: float = 1.0) -> List[Check]:
    grid = gauss_grid(dim, order)
    x = grid.nodes
    out = []
    for k in range(N_CASES):
        rng = rng_for(seed, 200 + k)
        p, q, r = (ExpDensity(random_tilt(dim, rng, TILT_KINDS[(k + j) % 4]), grid) for j in range(3))
        tag = f"charts/case{k:02d}"
        spq, sqr, spr = exp_chart(p, q, grid), exp_chart(q, r, grid), exp_chart(p, r, grid)
        # pointwise tolerances are relative to the largest summand at any node
        first, moved = spq(x), e_transport(q, p, FiberVector(q, sqr), grid).values(grid)
        out.append(equal_check(f"{tag}/exp_parallelogram", _sup(first + moved - spr(x)), 0.0,
                               1e-9 * ts * _scale(first, moved)))
        mpq, mqr, mpr = mix_chart(p, q, grid), mix_chart(q, r, grid), mix_chart(p, r, grid)
        first, moved = mpq(x), m_transport(q, p, FiberVector(q, mqr), grid).values(grid)
        out.append(equal_check(f"{tag}/mix_parallelogram", _sup(first + moved - mpr(x)), 0.0,
                               1e-9 * ts * _scale(first, moved)))
        back = exp_chart_inverse(p, spq, grid).density(x)
        target = q.density(x)
        out.append(equal_check(f"{tag}/chart_round_trip", _sup((back - target) / target), 0.0, 1e-9 * ts))
        out.append(equal_check(f"{tag}/normalization", grid.expect(target), 1.0, 1e-8 * ts))
        out.append(equal_check(f"{tag}/exp_chart_centering", p.expect(spq, grid), 0.0, 1e-9 * ts))
        h = 1e-4
        dK = (cumulant(p, spq * h, grid) - cumulant(p, spq * (-h), grid)) / (2 * h)
        out.append(equal_check(f"{tag}/cumulant_derivative", dK, 0.0, 1e-6 * ts))
    return out


def suite_geodesic(dim: int, order: int, seed: int, ts: float = 1.0) -> List[Check]:
    grid = gauss_grid(dim, order)
    x = grid.nodes
    out = []
    gam = ExpDensity.gaussian(dim, grid)
    loc = Curve([HermiteField.basis(unit(dim, 0))], lambda t: [t], gam, (-2.0, 2.0))
    for t in (-0.5, 0.3, 1.1):
        vel = velocity(loc, t, grid).values(grid)
        out.append(equal_check(f"geodesic/location/velocity(t={t:g})", _sup(vel - (x[:, 0] - t)), 0.0, 1e-8 * ts))
        out.append(le_check(f"geodesic/location/acceleration(t={t:g})", sup_norm(acceleration(loc, t, grid), grid),
                            0.0, 1e-6 * ts))
    for k in range(N_CASES):
        rng = rng_for(seed, 300 + k)
        p = ExpDensity(random_tilt(dim, rng, "mixed"), grid)
        kind = "linear" if k % 2 == 0 else "bounded"
        v = _centred_fiber(p, random_tilt(dim, rng, kind), grid)
        c = geodesic(p, v, grid)
        tag = f"geodesic/{kind}{k:02d}"
        for t in (-0.5, 0.25, 0.6):
            vel = velocity(c, t, grid)
            back = e_transport(vel.base, p, vel, grid).values(grid)
            out.append(equal_check(f"{tag}/transported_velocity(t={t:g})", _sup(back - v.values(grid)), 0.0, 1e-6 * ts))
            out.append(le_check(f"{tag}/acceleration(t={t:g})", sup_norm(acceleration(c, t, grid), grid), 0.0, 1e-6 * ts))
            chart = exp_chart(p, c.at(t), grid)(x)
            out.append(equal_check(f"{tag}/chart_affine(t={t:g})", _sup(chart - t * v.values(grid)), 0.0,
                                   1e-9 * ts * _scale(chart)))
    rng = rng_for(seed, 399)
    p = ExpDensity(random_tilt(dim, rng, "mixed"), grid)
    q = ExpDensity(random_tilt(dim, rng, "bounded"), grid)
    m = mixture_geodesic(p, q)
    end = m.chart(1.0, grid)(x)
    ref = (q.density(x) - p.density(x)) / p.density(x)
    for t in (0.1, 0.3, 0.5, 0.7, 0.9):
        ch = m.chart(t, grid)(x)
        out.append(equal_check(f"geodesic/mixture/chart_affine(t={t:g})", _sup(ch - t * end), 0.0, 1e-10 * ts * _scale(ch)))
        mv = m.velocity(t)
        back = m_transport(mv.base, p, mv, grid).values(grid)
        out.append(equal_check(f"geodesic/mixture/transported_velocity(t={t:g})", _sup(back - ref), 0.0,
                               1e-9 * ts * _scale(ref)))
    return out


def _chi2_corpus(dim: int, seed: int, grid) -> list:
    rng = rng_for(seed, 450)
    out = []
    for k in range(N_CASES):
        if k % 2 == 0:
            coeffs = {(0,) * dim: 1.0}
            for i in range(dim):
                coeffs[tuple(2 * e for e in unit(dim, i))] = float(rng.uniform(0.0, 0.3))
            out.append(HermiteField(dim, coeffs))
        else:
            out.append(ExpDensity(random_tilt(dim, rng, "mixed"), grid))
    return out


def suite_poincare(dim: int, order: int, seed: int, ts: float = 1.0) -> List[Check]:
    grid = gauss_grid(dim, order)
    out = []
    lin = HermiteField.basis(unit(dim, 0))
    res = ineq.gauss_poincare(lin, grid)
    out.append(equal_check("poincare/gauss_linear_equality", res.lhs, res.rhs, 1e-10 * ts))
    kappa = ineq.llogl_kappa()
    for k, f in enumerate(corpus_fields(dim, N_CASES, seed)):
        tag = f"poincare/case{k:02d}"
        out.append(_ineq_check(ineq.gauss_poincare(f, grid), f"{tag}/gauss_poincare", ts))
        for p in (1, 2, 3):
            out.append(_ineq_check(ineq.lp_poincare(f, p, grid), f"{tag}/lp_poincare(p={p})", ts))
        out.append(_ineq_check(ineq.lipschitz_mgf(f, 0.5, grid), f"{tag}/lipschitz_mgf", ts))
        out.append(_ineq_check(ineq.cosh_poincare(f, grid), f"{tag}/cosh_poincare", ts))
        out.append(_ineq_check(ineq.llogl_poincare(f, grid, kappa=kappa), f"{tag}/llogl_poincare", ts))
    for k, p in enumerate(_chi2_corpus(dim, seed, grid)):
        out.append(_ineq_check(ineq.chi2_bound(p, grid), f"poincare/chi2_case{k:02d}", ts))
    return out


def suite_covariance(dim: int, order: int, seed: int, ts: float = 1.0) -> List[Check]:
    grid = gauss_grid(dim, order)
    out = []
    for deg in (2, 3):
        h = HermiteField.basis((deg,) + (0,) * (dim - 1))
        exact, integral = ineq.covariance_ou(h, h)
        out.append(equal_check(f"covariance/ou_H{deg}H{deg}_exact", exact, math.factorial(deg), 1e-10 * ts))
        out.append(equal_check(f"covariance/ou_H{deg}H{deg}_integral", integral, exact, 1e-10 * ts))
    worst = 0.0
    basis = [HermiteField.basis(a) for a in multi_indices(min(dim, 2), 6)]
    for f in basis:
        for g in basis:
            e, i = ineq.covariance_ou(f, g)
            worst = max(worst, abs(e - i))
    rng = rng_for(seed, 500)
    for _ in range(N_CASES):
        f, g = random_hermite(dim, 6, rng), random_hermite(dim, 6, rng)
        e, i = ineq.covariance_ou(f, g)
        worst = max(worst, abs(e - i) / max(1.0, abs(e)))
    out.append(equal_check("covariance/ou_representation_max_discrepancy", worst, 0.0, 1e-10 * ts))
    setups = [("power:2", ("l2", "l2")), ("cosh2", ("l2", "l2")), ("cosh2", ("l1", "linf"))]
    fields = corpus_fields(dim, 2 * N_CASES, seed + 1)
    for k in range(N_CASES):
        key, norms = setups[k % 3]
        res = ineq.covariance_bound(fields[2 * k], fields[2 * k + 1], key, grid, norms)
        out.append(_ineq_check(res, f"covariance/bound_case{k:02d}({key},{norms[0]}/{norms[1]})", ts))
    return out


def suite_hyvarinen(dim: int, order: int, seed: int, ts: float = 1.0) -> List[Check]:
    grid = gauss_grid(dim, order)
    out = []
    e1 = HermiteField.basis(unit(dim, 0))
    for a, b in ((1.0, 0.0), (0.5, -0.5), (2.0, 1.0)):
        p, q = ExpDensity(e1 * a, grid), ExpDensity(e1 * b, grid)
        out.append(equal_check(f"hyvarinen/gaussian_shift(a={a:g},b={b:g})", app.hyvarinen(p, q, grid),
                               (a - b) ** 2 / 2, 1e-8 * ts))
    for k in range(N_CASES):
        rng = rng_for(seed, 600 + k)
        kinds = ("mixed", "bounded")
        p = ExpDensity(random_tilt(dim, rng, kinds[k % 2]), grid)
        q = ExpDensity(random_tilt(dim, rng, kinds[(k + 1) % 2]), grid)
        rep = app.score_identity_check(p, q, grid)
        tag = f"hyvarinen/case{k:02d}"
        out.append(equal_check(f"{tag}/score_identity", rep.divergence, rep.constant + rep.score_expectation, 1e-8 * ts))
        out.append(le_check(f"{tag}/nonnegative", 0.0, rep.divergence, 0.0))
    for a in (0.7, -0.4):
        p = ExpDensity(e1 * a, grid)
        out.append(equal_check(f"hyvarinen/minimizer(a={a:g})", app.score_minimizer(p, e1, grid=grid), a, 1e-3 * ts))
    return out


def suite_otto(dim: int, order: int, seed: int, ts: float = 1.0) -> List[Check]:
    grid1 = gauss_grid(1, order)
    H1, H2 = HermiteField.basis((1,)), HermiteField.basis((2,))
    out = []
    ng = app.natural_gradient(None, H1, grid1, basis=[H1])
    out.append(equal_check("otto/natural_gradient_identity", ng.coefficients[0], 1.0, 1e-10 * ts))
    ng = app.natural_gradient(None, H2, grid1, basis=[H1, H2])
    out.append(equal_check("otto/natural_gradient_diagonal_c1", ng.coefficients[0], 0.0, 1e-10 * ts))
    out.append(equal_check("otto/natural_gradient_diagonal_c2", ng.coefficients[1], 0.5, 1e-10 * ts))
    grid = gauss_grid(dim, order)
    for k in range(N_CASES):
        rng = rng_for(seed, 700 + k)
        p = ExpDensity(random_tilt(dim, rng, "quadratic" if k % 2 else "mixed"), grid)
        f = random_hermite(dim, 3, rng, 0.5, 1)
        g = random_hermite(dim, 3, rng, 0.5, 1)
        rep = app.otto_adjoint_check(p, f, g, grid)
        tag = f"otto/case{k:02d}"
        out.append(equal_check(f"{tag}/adjoint", rep.inner, rep.gamma_pairing, 1e-7 * ts))
        if k < 5:
            gram = app.OttoGram(p, app.default_basis(p, dim, 3 if dim > 2 else 4, grid), grid)
            lam = float(gram.eigenvalues()[0])
            out.append(Check(f"{tag}/gram_positive_definite", lam, passed=gram.is_positive_definite() and lam > 0))
            target = _centred_fiber(p, random_hermite(dim, 2, rng, 1.0, 1), grid)
            sol = app.natural_gradient(p, target, grid, basis=gram.basis)
            out.append(equal_check(f"{tag}/natural_gradient_residual", sol.residual, 0.0, 1e-10 * ts * _scale(gram.matrix)))
    return out


PROBE_VELOCITIES = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.5, 0.5], [2.0, 1.0, -1.0], [-0.3, 0.7, 2.2],
                             [1.2, -2.0, 0.1], [3.0, 0.0, 0.0], [-1.0, -1.0, -1.0], [0.5, 2.5, -0.5], [0.1, 0.2, 0.3]])

WEAK_TEST_FUNCTIONS: Dict[str, Callable] = {
    "v1": lambda v: v[..., 0],
    "v1^2": lambda v: v[..., 0] ** 2,
    "cos(v2)": lambda v: np.cos(v[..., 1]),
    "|v|^2": lambda v: np.sum(v * v, axis=-1),
    "tanh(v1+v3)": lambda v: np.tanh(v[..., 0] + v[..., 2]),
}


def boltzmann_densities(order: int = 24):
    grid = gauss_grid(3, order)
    return {
        "maxwellian": None,
        # quadratic coefficient below 1/8 keeps the fourth moment of f finite, so SEs are consistent
        "anisotropic": ExpDensity(parse_field("0.1*H(2,1)", 3), grid),
        "shifted": ExpDensity(parse_field("0.3*x1 - 0.2*x3 + 0.5*sin(x2)", 3), grid),
    }


def suite_boltzmann(dim: int, order: int, seed: int, ts: float = 1.0, n: int = 100_000) -> List[Check]:
    out = []
    s = GaussianSampler(3, seed, 0)
    v, w, xs = s.sample(1_000_000), s.sample(1_000_000), s.sphere(1_000_000)
    pair = bz.post_collision(v, w, xs, check=False)
    out.append(le_check("boltzmann/kinematics_momentum", float(pair.momentum_error().max()), 0.0, 1e-12 * ts))
    scale = 1 + np.sum(v * v, -1) + np.sum(w * w, -1)
    out.append(le_check("boltzmann/kinematics_energy", float((pair.energy_error() / scale).max()), 0.0, 1e-12 * ts))
    dens = boltzmann_densities()
    maxwellians = {"maxwellian": None, "drifting_maxwellian": ExpDensity(parse_field("0.3*x1 - 0.2*x2", 3),
                                                                         gauss_grid(3, 24))}
    for name, f in maxwellians.items():
        for j, vel in enumerate(PROBE_VELOCITIES):
            est = bz.collision_q(f, vel, GaussianSampler(3, seed, 10 + j), n)
            out.append(Check(f"boltzmann/{name}_Q(v{j})", est.value, 0.0, 3 * est.se * ts + bz.ROUNDOFF_FLOOR,
                             est.se, passed=est.within(k=3 * ts)))
    for name, f in dens.items():
        rep = bz.conservation_check(f, GaussianSampler(3, seed, 30 + len(name)), n)
        for inv, est in rep.symmetrized.items():
            out.append(Check(f"boltzmann/{name}/conservation_{inv}", est.value, 0.0, 3 * est.se * ts + bz.ROUNDOFF_FLOOR,
                             est.se, passed=est.within(k=3 * ts)))
        for inv, est in rep.raw.items():
            out.append(Check(f"boltzmann/{name}/conservation_raw_{inv}", est.value, 0.0,
                             3 * est.se * ts + bz.ROUNDOFF_FLOOR, est.se, passed=est.within(k=3 * ts)))
        e = rep.entropy
        out.append(le_check(f"boltzmann/{name}/entropy_production", e.value, 0.0, 3 * e.se * ts + bz.ROUNDOFF_FLOOR))
    cases = [(fn, gn) for fn in ("anisotropic", "shifted") for gn in WEAK_TEST_FUNCTIONS]
    for j, (fn, gn) in enumerate(cases):
        rep = bz.weak_identity_check(dens[fn], WEAK_TEST_FUNCTIONS[gn], GaussianSampler(3, seed, 50 + j), n)
        out.append(Check(f"boltzmann/weak_identity({fn},{gn})", rep.lhs.value, rep.rhs.value,
                         3 * rep.combined_se * ts + bz.ROUNDOFF_FLOOR, rep.combined_se, passed=rep.passed(3 * ts),
                         note=f"unweighted_reading_discrepancy={rep.unweighted_discrepancy:.6g}"))
    f = dens["anisotropic"]
    small = bz.collision_q(f, PROBE_VELOCITIES[3], GaussianSampler(3, seed, 90), n // 4)
    big = bz.collision_q(f, PROBE_VELOCITIES[3], GaussianSampler(3, seed, 91), n)
    out.append(equal_check("boltzmann/se_ratio_quadrupled_n", small.se / big.se, 2.0, 0.5 * ts))
    return out


SUITES = {
    "transports": suite_transports,
    "charts": suite_charts,
    "poincare": suite_poincare,
    "covariance": suite_covariance,
    "geodesic": suite_geodesic,
    "hyvarinen": suite_hyvarinen,
    "otto": suite_otto,
    "boltzmann": suite_boltzmann,
}


def run_suite(name: str, dim: int = 1, order: int = 40, seed: int = 0, tolerance_scale: float = 1.0) -> List[Check]:
    if name == "all":
        out = []
        for key in SUITES:
            out.extend(SUITES[key](dim, order, seed, tolerance_scale))
        return out
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    return SUITES[name](dim, order, seed, tolerance_scale)
