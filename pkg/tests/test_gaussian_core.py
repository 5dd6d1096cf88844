import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite_e import hermeval

from gaussbundle.fields import FunctionField
from gaussbundle.hermite import (HermiteField, generator, hermite_1d, hermite_eval, multi_factorial, multi_indices,
                                 ou_semigroup, partial, stein_div)
from gaussbundle.quadrature import IntegrandOverflow, gauss_grid, inner, integrate, ou_semigroup_integral
from gaussbundle.sampling import GaussianSampler, sample


def test_hermite_eval_examples():
    assert hermite_eval((0,), [3.7]) == 1
    assert hermite_eval((2,), [2.0]) == pytest.approx(3.0)
    assert hermite_eval((1, 1), [2.0, 3.0]) == pytest.approx(6.0)


@pytest.mark.parametrize("k", range(12))
def test_hermite_1d_matches_numpy_hermite_e(k):
    t = np.linspace(-4, 4, 17)
    coef = np.zeros(k + 1)
    coef[k] = 1
    np.testing.assert_allclose(hermite_1d(k, t), hermeval(t, coef), rtol=1e-12, atol=1e-9)


def test_partial_examples():
    assert partial(HermiteField.basis((2,)), 0) == HermiteField.basis((1,), 2.0)
    assert partial(HermiteField.constant(1, 5.0), 0).coeffs == {}
    assert partial(HermiteField.basis((1,), 3.0), 0) == HermiteField.constant(1, 3.0)


def test_stein_div_examples():
    assert stein_div([HermiteField.constant(1, 1.0)]) == HermiteField.basis((1,))
    h2 = HermiteField.basis((2,))
    assert stein_div([partial(h2, 0)]) == HermiteField.basis((2,), 2.0)
    assert stein_div([HermiteField(2, {}), HermiteField(2, {})]).coeffs == {}


def test_integrate_and_inner_examples():
    g = gauss_grid(1)
    h1, h2 = HermiteField.basis((1,)), HermiteField.basis((2,))
    assert integrate(h2, g) == pytest.approx(0.0, abs=1e-13)
    assert integrate(h1 * h1, gauss_grid(1, 2)) == pytest.approx(1.0, abs=1e-14)
    assert integrate(HermiteField.constant(1, 1.0), g) == pytest.approx(1.0, abs=1e-14)
    assert inner(h2, h2, g) == pytest.approx(2.0, abs=1e-12)
    assert inner(h1, h2, g) == pytest.approx(0.0, abs=1e-13)


def test_ou_semigroup_examples():
    h2 = HermiteField.basis((2,))
    assert ou_semigroup(h2, math.log(2)).coeffs[(2,)] == pytest.approx(0.25)
    assert ou_semigroup(HermiteField.constant(1, 4.0), 3.0) == HermiteField.constant(1, 4.0)
    f = ou_semigroup(HermiteField(1, {(1,): 1.0, (3,): 1.0}), 1.0)
    assert f.coeffs[(1,)] == pytest.approx(math.exp(-1))
    assert f.coeffs[(3,)] == pytest.approx(math.exp(-3))


def test_ou_semigroup_matches_mehler_integral():
    g = gauss_grid(1)
    f = HermiteField(1, {(2,): 1.0, (3,): -0.5, (1,): 0.25})
    for t in (0.0, 0.3, 1.0):
        for x in (-1.2, 0.0, 0.7):
            assert ou_semigroup_integral(f, t, [x], g) == pytest.approx(float(f.ou(t)([x])), abs=1e-12)
    assert ou_semigroup_integral(HermiteField.basis((1,)), 0.0, [0.5], g) == pytest.approx(0.5)
    assert ou_semigroup_integral(HermiteField.basis((2,)), 1.0, [1.0], g) == pytest.approx(0.0, abs=1e-14)
    sin = FunctionField(1, lambda x: np.sin(x[..., 0]))
    assert ou_semigroup_integral(sin, 40.0, [2.0], g) == pytest.approx(0.0, abs=1e-12)


def test_stein_laplacian_has_degree_eigenvalues():
    for alpha in multi_indices(2, 4, 1):
        h = HermiteField.basis(alpha)
        assert generator(h) == HermiteField.basis(alpha, float(sum(alpha)))


def test_sampler_determinism_and_moments():
    a = GaussianSampler(1, seed=3).sample(1000)
    b = GaussianSampler(1, seed=3).sample(1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, GaussianSampler(1, seed=3, stream=1).sample(1000))
    x = sample(GaussianSampler(1, seed=0), 10 ** 6)[:, 0]
    assert abs(x.mean()) < 4 / 1000
    assert abs(x.var() - 1) < 0.01


def test_sphere_points_are_unit():
    pts = GaussianSampler(3, seed=1).sphere(1000)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-14)


def test_grid_rejects_overflow():
    g = gauss_grid(1)
    with pytest.raises(IntegrandOverflow), np.errstate(over="ignore"):
        g.expect(np.exp(g.nodes[:, 0] ** 2 * 400))


def test_grid_dimension_cap():
    with pytest.raises(ValueError):
        gauss_grid(5)


coeff_maps = st.dictionaries(st.sampled_from(list(multi_indices(2, 3))),
                             st.floats(-2, 2, allow_nan=False), max_size=6)


@settings(max_examples=60, deadline=None)
@given(coeff_maps, coeff_maps)
def test_product_linearization_matches_pointwise_product(a, b):
    f, g = HermiteField(2, a), HermiteField(2, b)
    x = np.array([[0.3, -1.1], [2.0, 0.5], [-0.7, 1.9]])
    np.testing.assert_allclose((f * g)(x), f(x) * g(x), rtol=1e-10, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(coeff_maps, coeff_maps, st.integers(0, 1))
def test_integration_by_parts(a, b, i):
    # E[d_i f g] = E[f delta_i g]
    f, g = HermiteField(2, a), HermiteField(2, b)
    lhs = (f.partial(i) * g).mean
    rhs = (f * g.raise_(i)).mean
    assert lhs == pytest.approx(rhs, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(coeff_maps, st.floats(0, 3))
def test_ou_is_a_contraction_in_l2(a, t):
    f = HermiteField(2, a)
    assert f.ou(t).variance() <= f.variance() + 1e-12


def test_orthogonality_table_dims_1_to_3():
    for dim in (1, 2, 3):
        g = gauss_grid(dim, 8)
        idx = list(multi_indices(dim, 6))
        vals = np.array([hermite_eval(a, g.nodes) for a in idx])
        gram = (vals * g.weights) @ vals.T
        expect = np.diag([float(multi_factorial(a)) for a in idx])
        assert np.max(np.abs(gram - expect)) < 1e-10
