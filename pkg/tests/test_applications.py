import numpy as np
import pytest

from gaussbundle import applications as app
from gaussbundle.bundle import FiberVector
from gaussbundle.corpus import random_hermite, random_tilt, rng_for
from gaussbundle.expfamily import ExpDensity, shift_field
from gaussbundle.fields import ConstantField
from gaussbundle.fieldspec import parse_field
from gaussbundle.hermite import HermiteField
from gaussbundle.quadrature import gauss_grid

G = gauss_grid(1)
X = G.nodes
H1, H2 = HermiteField.basis((1,)), HermiteField.basis((2,))


def lin(a):
    return ExpDensity(H1 * a, G)


def test_hyvarinen_examples():
    p = ExpDensity(parse_field("sin(x1) + 0.1*H(2,1)", 1), G)
    assert app.hyvarinen(p, p, G) == 0
    for a, b in ((1.0, 0.0), (0.5, -0.5), (2.0, 1.0)):
        assert app.hyvarinen(lin(a), lin(b), G) == pytest.approx((a - b) ** 2 / 2, abs=1e-8)


def test_local_score_examples():
    assert np.all(app.local_score(ConstantField(1, 0.0))(X) == 0)
    a = 0.7
    np.testing.assert_allclose(app.local_score(H1 * a)(X), 0.5 * a * a - a * X[:, 0], atol=1e-12)
    np.testing.assert_allclose(app.local_score(H2 * 0.2)(X), -0.32 * X[:, 0] ** 2 + 0.4, rtol=1e-12, atol=1e-12)


def test_score_identity_examples():
    p = ExpDensity(parse_field("cos(x1) + 0.05*H(2,1)", 1), G)
    assert app.score_identity_check(p, p, G).discrepancy < 1e-8
    r = app.score_identity_check(lin(1.0), lin(0.0), G)
    assert r.divergence == pytest.approx(0.5, abs=1e-12) and r.discrepancy < 1e-8
    # the cross term computed directly and by integration by parts agree
    q = ExpDensity(parse_field("0.5*sin(x1)", 1), G)
    r = app.score_identity_check(p, q, G)
    assert r.cross_direct == pytest.approx(r.cross_stein, abs=1e-8)


def test_score_identity_random_pairs():
    for k in range(20):
        rng = rng_for(1, k)
        p = ExpDensity(random_tilt(1, rng, "mixed"), G)
        q = ExpDensity(random_tilt(1, rng, "bounded"), G)
        assert app.score_identity_check(p, q, G).discrepancy < 1e-8


def test_score_minimizer_recovers_parameter():
    for a in (0.7, -0.3, 1.5):
        assert app.score_minimizer(lin(a), H1, grid=G) == pytest.approx(a, abs=1e-3)


def test_otto_inner_examples():
    assert app.otto_inner(None, H1, H1, G) == pytest.approx(1.0)
    assert app.otto_inner(None, ConstantField(1, 0.0), H1, G) == 0
    p = lin(1.0)
    f = H1 - 1.0  # centred under e^{x - 1/2} gamma
    assert app.otto_inner(p, f, f, G) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        app.otto_inner(p, H1, H1, G)


def test_otto_adjoint_examples():
    r = app.otto_adjoint_check(None, H1, H1, G)
    assert r.inner == pytest.approx(1.0) and r.gamma_pairing == pytest.approx(1.0)
    r = app.otto_adjoint_check(lin(0.4), H1, ConstantField(1, 2.0), G)
    assert r.inner == 0 and r.gamma_pairing == 0


def test_otto_adjoint_random_quadratic_tilts():
    for dim in (1, 2):
        grid = gauss_grid(dim, 40 if dim == 1 else 30)
        for k in range(10):
            rng = rng_for(2, 10 * dim + k)
            p = ExpDensity(random_tilt(dim, rng, "quadratic"), grid)
            f, g = random_hermite(dim, 3, rng, 0.5, 1), random_hermite(dim, 3, rng, 0.5, 1)
            assert app.otto_adjoint_check(p, f, g, grid).discrepancy < 1e-7


def test_natural_gradient_examples():
    ng = app.natural_gradient(None, H1, G, basis=[H1])
    assert ng.coefficients[0] == pytest.approx(1.0, abs=1e-10)
    ng = app.natural_gradient(None, H2, G, basis=[H1, H2])
    np.testing.assert_allclose(ng.coefficients, [0.0, 0.5], atol=1e-10)
    ng = app.natural_gradient(None, HermiteField.basis((3,)), G, basis=[H2])
    assert ng.coefficients[0] == pytest.approx(0.0, abs=1e-10)


def test_natural_gradient_under_tilted_density():
    p = ExpDensity(parse_field("0.3*sin(x1) + 0.05*H(2,1)", 1), G)
    basis = app.default_basis(p, 1, 4, G)
    t = shift_field(H2, p.expect(H2, G))
    ng = app.natural_gradient(p, FiberVector(p, t), G, basis=basis)
    assert ng.residual < 1e-10
    # the solution satisfies the Galerkin equations <<g, b>>_p = E_p[target b]
    for b in basis:
        assert app.otto_inner(p, ng.field, b, G, check=False) == pytest.approx(p.expect(t(X) * b(X), G), abs=1e-10)


def test_gram_positive_definite_and_singular_detection():
    for k in range(5):
        p = ExpDensity(random_tilt(1, rng_for(3, k), "mixed"), G)
        assert app.OttoGram(p, app.default_basis(p, 1, 5, G), G).is_positive_definite()
    gram = app.OttoGram(None, [H1, H1 * 2.0], G)
    assert not gram.is_positive_definite()
    with pytest.raises(app.SingularGramError) as err:
        gram.cholesky()
    v = err.value.direction
    assert abs(v[0] + 2 * v[1]) < 1e-8 and abs(err.value.eigenvalue) < 1e-10
