"""Command-line front end: field specs in, deterministic JSON or CSV reports out."""
from __future__ import annotations

import argparse
import math
import sys
import time
from typing import List, Optional

import numpy as np
import scipy

from . import __version__
from . import applications as app
from . import boltzmann as bz
from .bundle import FiberVector, duality_check, e_transport, m_transport
from .expfamily import ExpDensity, InadmissibleTilt, cumulant, field_text, shift_field
from .fieldspec import ParseError, parse_field
from .hermite import multi_indices
from .orlicz import NormOverflow, dual_norm, luxemburg_norm
from .quadrature import IntegrandOverflow, gauss_grid
from .report import Check, Report, equal_check
from .sampling import GaussianSampler
from .suites import PROBE_VELOCITIES, SUITES, WEAK_TEST_FUNCTIONS, run_suite
from .young import young

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
BOLTZMANN_GRID_ORDER = 24


class UsageError(Exception):
    pass


def _global_flags(parser: argparse.ArgumentParser, suppress: bool):
    def d(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--dim", type=int, default=d(1), help="dimension of the Gaussian space (1 to 4)")
    parser.add_argument("--quad-order", type=int, default=d(40), help="Gauss-Hermite nodes per axis")
    parser.add_argument("--seed", type=int, default=d(0))
    parser.add_argument("--format", choices=("json", "csv"), default=d("json"))
    parser.add_argument("--tolerance-scale", type=float, default=d(1.0), help="multiplies every default tolerance")
    parser.add_argument("--timing", action="store_true", default=d(False), help="add elapsed_ms to the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussbundle",
                                     description="Information geometry on the finite-dimensional Gaussian space.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", choices=("all",) + tuple(SUITES), default="all")

    p = sub.add_parser("norm", parents=[common], help="Luxemburg or dual Orlicz norm of |f|")
    p.add_argument("--young", required=True, help="power:p, exp2, cosh2, gauss2, conj:KEY or sq:KEY")
    p.add_argument("--field", required=True)
    p.add_argument("--dual", action="store_true")

    p = sub.add_parser("cumulant", parents=[common], help="K_p(v) = log E_p[e^v]")
    p.add_argument("--field", required=True)
    p.add_argument("--base", default="0", help="tilt of the base density (default: Gaussian)")

    p = sub.add_parser("transport", parents=[common], help="e- or m-transport of a fiber vector")
    p.add_argument("--kind", choices=("e", "m"), required=True)
    p.add_argument("--from", dest="frm", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--vector", required=True)

    p = sub.add_parser("divergence", parents=[common], help="Hyvarinen divergence between tilted Gaussians")
    p.add_argument("--kind", choices=("hyvarinen",), default="hyvarinen")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)

    p = sub.add_parser("otto-grad", parents=[common], help="natural gradient in the Otto metric")
    p.add_argument("--p", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--degree", type=int, default=4)

    p = sub.add_parser("boltzmann", parents=[common], help="Monte Carlo checks of the Boltzmann operator (R^3)")
    p.add_argument("--f", default="0", help="tilt of the density relative to the Gaussian on R^3")
    p.add_argument("--check", choices=("conservation", "maxwellian", "weak"), required=True)
    p.add_argument("--samples", type=int, default=100_000)
    return parser


def _field(src: str, dim: int):
    return parse_field(src, dim)


def _density(src: str, dim: int, grid) -> ExpDensity:
    return ExpDensity(_field(src, dim), grid)


def _mc_check(name: str, est: bz.McEstimate, target: float, ts: float) -> Check:
    return Check(name, est.value, target, 3 * ts * est.se + bz.ROUNDOFF_FLOOR, est.se,
                 passed=est.within(target, k=3 * ts))


def cmd_verify(a) -> List[Check]:
    return run_suite(a.suite, a.dim, a.quad_order, a.seed, a.tolerance_scale)


def cmd_norm(a, grid) -> List[Check]:
    phi = young(a.young)
    f = _field(a.field, a.dim)
    kind = "dual" if a.dual else "luxemburg"
    try:
        value = (dual_norm if a.dual else luxemburg_norm)(f, phi, grid)
    except (NormOverflow, IntegrandOverflow) as exc:
        return [Check(f"{kind}_norm({phi.key})", math.nan, passed=False, note=f"overflow: {exc}")]
    return [Check(f"{kind}_norm({phi.key})", value)]


def cmd_cumulant(a, grid) -> List[Check]:
    p = _density(a.base, a.dim, grid)
    v = _field(a.field, a.dim)
    mean = p.expect(v, grid)
    return [Check("cumulant", cumulant(p, v, grid)), Check("mean_under_base", mean)]


def cmd_transport(a, grid) -> List[Check]:
    ts = a.tolerance_scale
    mu, nu = _density(a.frm, a.dim, grid), _density(a.to, a.dim, grid)
    raw = _field(a.vector, a.dim)
    shift = mu.expect(raw, grid)
    u = FiberVector(mu, shift_field(raw, shift))
    moved = (e_transport if a.kind == "e" else m_transport)(mu, nu, u, grid)
    vals = moved.values(grid)
    out = [Check("centering_shift", shift), Check("target_l2_norm", math.sqrt(nu.expect(vals * vals, grid)))]
    if a.kind == "e":
        out[0].note = "transported=" + field_text(moved.v)
    out.append(equal_check("mean_under_target", nu.expect(moved.v, grid), 0.0, 1e-9 * ts))
    rep = duality_check(mu, nu, u, u, grid)
    out.append(equal_check("duality", rep.lhs, rep.rhs, 1e-8 * ts))
    return out


def cmd_divergence(a, grid) -> List[Check]:
    p, q = _density(a.p, a.dim, grid), _density(a.q, a.dim, grid)
    rep = app.score_identity_check(p, q, grid)
    return [
        Check("hyvarinen", rep.divergence),
        Check("score_constant", rep.constant),
        Check("score_expectation", rep.score_expectation),
        equal_check("score_identity", rep.divergence, rep.constant + rep.score_expectation, 1e-8 * a.tolerance_scale),
    ]


def cmd_otto_grad(a, grid) -> List[Check]:
    p = _density(a.p, a.dim, grid)
    target = _field(a.target, a.dim)
    shift = p.expect(target, grid)
    ng = app.natural_gradient(p, FiberVector(p, shift_field(target, shift)), grid, degree=a.degree)
    out = [Check(f"c{list(alpha)}", float(c)) for alpha, c in zip(multi_indices(a.dim, a.degree, 1), ng.coefficients)]
    out.append(Check("gram_min_eigenvalue", float(ng.gram.eigenvalues()[0])))
    scale = max(1.0, float(np.max(np.abs(ng.gram.matrix))))
    out.append(equal_check("galerkin_residual", ng.residual, 0.0, 1e-10 * a.tolerance_scale * scale))
    return out


def cmd_boltzmann(a) -> List[Check]:
    ts = a.tolerance_scale
    f = ExpDensity(_field(a.f, 3), gauss_grid(3, BOLTZMANN_GRID_ORDER))
    if a.check == "maxwellian":
        return [_mc_check(f"Q(v{j})", bz.collision_q(f, v, GaussianSampler(3, a.seed, 10 + j), a.samples), 0.0, ts)
                for j, v in enumerate(PROBE_VELOCITIES)]
    if a.check == "conservation":
        rep = bz.conservation_check(f, GaussianSampler(3, a.seed, 0), a.samples)
        out = [_mc_check(f"conservation_{k}", e, 0.0, ts) for k, e in rep.symmetrized.items()]
        out += [_mc_check(f"conservation_raw_{k}", e, 0.0, ts) for k, e in rep.raw.items()]
        e = rep.entropy
        out.append(Check("entropy_production", e.value, 0.0, 3 * ts * e.se + bz.ROUNDOFF_FLOOR, e.se,
                         passed=e.value <= 3 * ts * e.se + bz.ROUNDOFF_FLOOR))
        return out
    out = []
    for j, (name, g) in enumerate(WEAK_TEST_FUNCTIONS.items()):
        rep = bz.weak_identity_check(f, g, GaussianSampler(3, a.seed, 50 + j), a.samples)
        out.append(Check(f"weak_identity({name})", rep.lhs.value, rep.rhs.value,
                         3 * ts * rep.combined_se + bz.ROUNDOFF_FLOOR, rep.combined_se, passed=rep.passed(3 * ts)))
    return out


def _params(a) -> dict:
    skip = {"command", "format", "timing", "seed"}
    return {k: v for k, v in sorted(vars(a).items()) if k not in skip}


def execute(a) -> Report:
    start = time.perf_counter()
    if not 1 <= a.dim <= 4:
        raise UsageError("--dim must be between 1 and 4")
    if a.quad_order < 2:
        raise UsageError("--quad-order must be at least 2")
    if a.command == "verify":
        results = cmd_verify(a)
    elif a.command == "boltzmann":
        if a.samples < 2:
            raise UsageError("--samples must be at least 2")
        results = cmd_boltzmann(a)
    else:
        grid = gauss_grid(a.dim, a.quad_order)
        handler = {"norm": cmd_norm, "cumulant": cmd_cumulant, "transport": cmd_transport,
                   "divergence": cmd_divergence, "otto-grad": cmd_otto_grad}[a.command]
        results = handler(a, grid)
    report = Report(a.command, _params(a), a.seed, results,
                    {"gaussbundle": __version__, "numpy": np.__version__, "scipy": scipy.__version__})
    if a.timing:
        report.elapsed_ms = round((time.perf_counter() - start) * 1000, 3)
    return report


def _caret(src: str, pos: int) -> str:
    return f"  {src}\n  {' ' * pos}^"


def run(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        report = execute(a)
    except ParseError as exc:
        print(f"error: parse error: {exc}", file=stderr)
        if exc.src:
            print(_caret(exc.src, exc.pos), file=stderr)
        return EXIT_USAGE
    except InadmissibleTilt as exc:
        cert = exc.certificate
        verdict = "unknown" if cert is None else cert.kind
        print(f"error: inadmissible tilt: {exc} (certificate: {verdict})", file=stderr)
        return EXIT_USAGE
    except (UsageError, KeyError) as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=stderr)
        return EXIT_USAGE
    stdout.write(report.to_json() if a.format == "json" else report.to_csv())
    for c in report.failures():
        print(f"FAILED {c.describe()}", file=stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
