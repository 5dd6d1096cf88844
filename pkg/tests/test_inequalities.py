import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from gaussbundle import inequalities as ineq
from gaussbundle.corpus import corpus_fields
from gaussbundle.expfamily import ExpDensity
from gaussbundle.fields import ConstantField
from gaussbundle.fieldspec import parse_field
from gaussbundle.hermite import HermiteField, multi_indices
from gaussbundle.quadrature import IntegrandOverflow, gauss_grid
from gaussbundle.sampling import GaussianSampler
from gaussbundle.young import power

G = gauss_grid(1)
H1, H2, H3 = (HermiteField.basis((k,)) for k in (1, 2, 3))
SIN = parse_field("sin(x1)", 1)
CONST = ConstantField(1, 2.5)


def test_gauss_poincare_examples():
    r = ineq.gauss_poincare(H1, G)
    assert r.lhs == pytest.approx(1.0, abs=1e-12) and r.rhs == pytest.approx(1.0, abs=1e-12) and r.passed
    r = ineq.gauss_poincare(H2, G)
    assert (r.lhs, r.rhs) == (pytest.approx(2.0), pytest.approx(4.0))
    r = ineq.gauss_poincare(CONST, G)
    assert r.lhs == 0 and r.rhs == 0


@pytest.mark.parametrize("p", [1, 2, 3])
def test_tilde_phi_power(p):
    a = 0.7
    m = ineq.gaussian_abs_moment_exact(2 * p)
    assert ineq.tilde_phi(lambda s: np.abs(s) ** (2 * p), a) == pytest.approx((math.pi / 2) ** (2 * p) * m * a ** (2 * p),
                                                                               rel=1e-10)


def test_tilde_phi_exp_and_zero():
    a = 0.4
    assert ineq.tilde_phi(np.exp, a) == pytest.approx(math.exp(math.pi ** 2 * a * a / 8), rel=1e-10)
    assert ineq.tilde_phi(power(2), 0.0) == 0
    with pytest.raises(IntegrandOverflow):
        ineq.tilde_phi(lambda s: np.exp(s * s), 1.0)


@pytest.mark.parametrize("r", [1, 2, 3, 4, 6, 2.5])
def test_gaussian_moments(r):
    oracle = integrate.quad(lambda z: abs(z) ** r * stats.norm.pdf(z), -np.inf, np.inf)[0]
    assert ineq.gaussian_abs_moment_exact(r) == pytest.approx(oracle, rel=1e-9)
    if r % 2 == 0:
        # quadrature is exact for even powers only; |z|^r is not smooth at 0 otherwise
        assert ineq.gaussian_abs_moment(r) == pytest.approx(oracle, rel=1e-12)


@pytest.mark.parametrize("p", [1, 1.5, 2, 3])
def test_lp_constant(p):
    m = integrate.quad(lambda z: abs(z) ** (2 * p) * stats.norm.pdf(z), -np.inf, np.inf)[0]
    assert ineq.lp_constant(p) == pytest.approx(math.pi / 2 * m ** (1 / (2 * p)), rel=1e-9)


def test_lp_poincare_examples():
    r = ineq.lp_poincare(H1, 1, G)
    assert r.constant == pytest.approx(math.pi / 2, rel=1e-12)
    assert r.lhs == pytest.approx(1.0, abs=1e-12) and r.passed
    assert ineq.lp_poincare(SIN, 2, G).passed
    r = ineq.lp_poincare(CONST, 3, G)
    assert r.lhs == 0 and r.rhs == 0


def test_lipschitz_mgf_examples():
    assert ineq.lipschitz_mgf(SIN, 0.5, G).passed
    assert ineq.lipschitz_mgf(parse_field("tanh(2*x1)", 1), 0.4, G).passed
    r = ineq.lipschitz_mgf(CONST, 0.5, G)
    assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(1.0)


def test_cosh_poincare_examples():
    r = ineq.cosh_poincare(CONST, G)
    assert r.lhs == 0 and r.rhs == 0
    assert ineq.cosh_poincare(SIN, G).passed
    r = ineq.cosh_poincare(H2 * 0.3, G)
    assert not r.skipped and r.passed


def test_cosh_poincare_skips_infinite_rhs():
    # |grad| = 0.3 x^2 grows too fast for a finite gauss2 norm
    r = ineq.cosh_poincare(H3 * 0.1, G)
    assert r.skipped


def test_llogl_kappa_bisection_oracle():
    k = ineq.llogl_kappa()

    def G_(kappa):
        c = math.pi / 2 * kappa
        return integrate.quad(lambda z: max(c * abs(z), (c * z) ** 2) * stats.norm.pdf(z), -np.inf, np.inf,
                              epsabs=1e-13)[0]

    assert G_(k) == pytest.approx(1.0, abs=1e-8)
    assert k == pytest.approx(0.59701224, abs=1e-7)


def test_llogl_poincare_examples():
    r = ineq.llogl_poincare(CONST, G)
    assert r.lhs == 0 and r.rhs == 0
    assert ineq.llogl_poincare(H2, G).passed


def test_covariance_ou_examples():
    assert ineq.covariance_ou(H2, H2) == (pytest.approx(2.0), pytest.approx(2.0))
    assert ineq.covariance_ou(H1, H2) == (0, 0)
    assert ineq.covariance_ou(H3, H3) == (pytest.approx(6.0), pytest.approx(6.0))


def test_covariance_ou_all_pairs_degree_6():
    for dim in (1, 2):
        basis = [HermiteField.basis(a) for a in multi_indices(dim, 6)]
        for f in basis:
            for g in basis:
                e, i = ineq.covariance_ou(f, g)
                assert abs(e - i) < 1e-10


def test_covariance_bound_examples():
    r = ineq.covariance_bound(H1, H1, "power:2", G)
    assert r.lhs == pytest.approx(1.0) and r.rhs >= 1 - 1e-9 and r.passed
    g2 = gauss_grid(2, 24)
    r = ineq.covariance_bound(parse_field("sin(x1)", 2), parse_field("sin(x2)", 2), "cosh2", g2)
    assert r.lhs == pytest.approx(0.0, abs=1e-14) and r.passed
    fs = corpus_fields(1, 6, seed=1)
    for f, g in zip(fs[::2], fs[1::2]):
        assert ineq.covariance_bound(f, g, "cosh2", G).passed
    with pytest.raises(ValueError):
        ineq.covariance_bound(H1, H1, "cosh2", G, norms=("l1", "l2"))


def test_chi2_examples():
    r = ineq.chi2_bound(HermiteField.constant(1, 1.0), G)
    assert r.lhs == 0 and r.rhs == 0
    r = ineq.chi2_bound(HermiteField(1, {(0,): 1.0, (2,): 0.1}), G)
    assert r.lhs == pytest.approx(0.02, abs=1e-12) and r.rhs == pytest.approx(0.08, abs=1e-12)
    assert ineq.chi2_bound(ExpDensity(parse_field("sin(x1) + 0.1*H(2,1)", 1), G), G).passed
    with pytest.raises(ValueError):
        ineq.chi2_bound(HermiteField(1, {(0,): 1.0, (3,): 0.1}), G)


def test_lln_demo_examples():
    rep = ineq.lln_demo(SIN, None, GaussianSampler(1, seed=0), replicas=100)
    assert rep.target == pytest.approx(0.0, abs=1e-14)
    ratios = rep.rate_ratios()
    assert np.all(ratios > 1.1) and np.all(ratios < 1.8)
    rep = ineq.lln_demo(ConstantField(1, 3.0), None, GaussianSampler(1, seed=0), schedule=(1, 2), replicas=5)
    assert rep.rms_errors[0] == 0
    with pytest.raises(ValueError):
        ineq.lln_demo(H1, None, GaussianSampler(1))


small_hermite = st.dictionaries(st.sampled_from(list(multi_indices(1, 4, 1))), st.floats(-1, 1), min_size=1,
                                max_size=4)


@settings(max_examples=40, deadline=None)
@given(small_hermite)
def test_gauss_poincare_property(coeffs):
    assert ineq.gauss_poincare(HermiteField(1, coeffs), G).passed


@settings(max_examples=40, deadline=None)
@given(small_hermite, small_hermite)
def test_covariance_representation_property(a, b):
    e, i = ineq.covariance_ou(HermiteField(1, a), HermiteField(1, b))
    assert e == pytest.approx(i, abs=1e-10)
    f, g = HermiteField(1, a), HermiteField(1, b)
    fv, gv = f(G.nodes), g(G.nodes)
    assert e == pytest.approx(G.expect(fv * gv) - G.expect(fv) * G.expect(gv), abs=1e-9)
