import numpy as np
import pytest

from gaussbundle import boltzmann as bz
from gaussbundle.expfamily import ExpDensity
from gaussbundle.fieldspec import parse_field
from gaussbundle.quadrature import gauss_grid
from gaussbundle.sampling import GaussianSampler

G3 = gauss_grid(3, 24)
ANISO = ExpDensity(parse_field("0.1*H(2,1)", 3), G3)
SHIFTED = ExpDensity(parse_field("0.3*x1 - 0.2*x3 + 0.5*sin(x2)", 3), G3)


def test_post_collision_examples():
    v = np.array([0.3, -1.0, 2.0])
    pair = bz.post_collision(v, v, np.array([0.0, 0.6, 0.8]))
    np.testing.assert_array_equal(pair.v_x, v)
    np.testing.assert_array_equal(pair.w_x, v)
    pair = bz.post_collision([1.0, 0, 0], [-1.0, 0, 0], [1.0, 0, 0])
    np.testing.assert_array_equal(pair.v_x, [-1, 0, 0])
    np.testing.assert_array_equal(pair.w_x, [1, 0, 0])


def test_post_collision_rejects_non_unit_direction():
    with pytest.raises(ValueError):
        bz.post_collision(np.zeros(3), np.ones(3), np.array([1.0, 1.0, 0.0]))


def test_kinematics_on_a_million_triples():
    s = GaussianSampler(3, seed=0)
    v, w, x = s.sample(10 ** 6), s.sample(10 ** 6), s.sphere(10 ** 6)
    pair = bz.post_collision(v, w, x, check=False)
    scale = 1 + np.sum(v * v, -1) + np.sum(w * w, -1)
    assert pair.momentum_error().max() <= 1e-12
    assert (pair.energy_error() / scale).max() <= 1e-12


def test_gaussian_factorization_identity():
    s = GaussianSampler(3, seed=1)
    v, w, x = s.sample(1000), s.sample(1000), s.sphere(1000)
    pair = bz.post_collision(v, w, x)
    lhs = bz.gaussian3(pair.v_x) * bz.gaussian3(pair.w_x)
    np.testing.assert_allclose(lhs, bz.gaussian3(v) * bz.gaussian3(w), rtol=1e-12)


@pytest.mark.parametrize("j", range(10))
def test_maxwellian_is_a_fixed_point(j):
    v = GaussianSampler(3, seed=99).sample(10)[j] * 1.5
    est = bz.collision_q(None, v, GaussianSampler(3, seed=j), 100_000)
    assert est.within()


def test_drifting_maxwellian_is_a_fixed_point_to_roundoff():
    f = ExpDensity(parse_field("0.3*x1 - 0.2*x2", 3), G3)
    est = bz.collision_q(f, [0.5, -1.0, 2.0], GaussianSampler(3, seed=4), 100_000)
    assert abs(est.value) < 1e-12 and est.within()


def test_collision_q_nonzero_off_equilibrium():
    est = bz.collision_q(ANISO, [2.0, 0.0, 0.0], GaussianSampler(3, seed=2), 100_000)
    assert abs(est.value) > 5 * est.se


def test_collision_q_degenerate_kernel():
    # w = v makes the kernel vanish
    v = np.array([0.3, 0.2, -0.1])
    pair = bz.post_collision(v, v, np.array([1.0, 0.0, 0.0]))
    assert np.sum(pair.x * (pair.v - pair.w)) == 0


def test_se_halves_when_n_quadruples():
    v = [1.0, -0.5, 0.3]
    small = bz.collision_q(ANISO, v, GaussianSampler(3, seed=5), 25_000)
    big = bz.collision_q(ANISO, v, GaussianSampler(3, seed=6), 100_000)
    assert 2 * 0.75 <= small.se / big.se <= 2 * 1.25


@pytest.mark.parametrize("f", [None, ANISO, SHIFTED], ids=["maxwellian", "anisotropic", "shifted"])
def test_conservation(f):
    rep = bz.conservation_check(f, GaussianSampler(3, seed=7), 100_000)
    assert rep.passed()
    if f is None:
        assert all(e.value == 0 for e in rep.raw.values())


def test_entropy_production_is_negative_off_equilibrium():
    rep = bz.conservation_check(SHIFTED, GaussianSampler(3, seed=8), 100_000)
    assert rep.entropy.value < -3 * rep.entropy.se


def test_lebedev_rule_integrates_low_degree_exactly():
    pts, w = bz.sphere_rule()
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    # averages over the uniform sphere: x^2 -> 1/3, x^4 -> 1/5, x^2 y^2 -> 1/15, x^6 -> 1/7
    x, y, z = pts.T
    assert w @ x ** 2 == pytest.approx(1 / 3)
    assert w @ x ** 4 == pytest.approx(1 / 5)
    assert w @ (x * x * y * y) == pytest.approx(1 / 15)
    assert w @ x ** 6 == pytest.approx(1 / 7)
    assert abs(w @ (x * y ** 3)) < 1e-15


def test_weak_form_a_examples():
    s = GaussianSampler(3, seed=3)
    v, w = s.sample(50), s.sample(50)
    energy = lambda u: np.sum(u * u, axis=-1)  # noqa: E731
    assert np.max(np.abs(bz.weak_form_a(energy, v, w))) < 1e-12
    assert np.max(np.abs(bz.weak_form_a(lambda u: np.ones(u.shape[:-1]), v, w))) < 1e-15
    assert np.max(np.abs(bz.weak_form_a(lambda u: np.cos(u[..., 0]), v, v))) < 1e-15


def test_weak_form_rule_matches_monte_carlo_sphere():
    s = GaussianSampler(3, seed=10)
    v, w = s.sample(1), s.sample(1)
    g = lambda u: u[..., 0] ** 2 * u[..., 1]  # noqa: E731
    exact = bz.weak_form_a(g, v, w)
    mc = bz.weak_form_a(g, v, w, bz.sphere_rule("mc", s, 400_000))
    assert mc == pytest.approx(exact, abs=5e-3)


def test_weak_identity_examples():
    const = lambda u: np.ones(u.shape[:-1])  # noqa: E731
    rep = bz.weak_identity_check(SHIFTED, const, GaussianSampler(3, seed=11), 100_000)
    assert abs(rep.rhs.value) < 1e-12 and rep.passed()
    rep = bz.weak_identity_check(None, lambda u: np.cos(u[..., 1]), GaussianSampler(3, seed=12), 100_000)
    assert rep.lhs.value == 0 and rep.passed()
    rep = bz.weak_identity_check(ANISO, lambda u: u[..., 0], GaussianSampler(3, seed=13), 100_000)
    assert rep.passed() and abs(rep.rhs.value) < 1e-12


@pytest.mark.parametrize("name", ["v1^2", "cos(v2)", "|v|^2", "tanh(v1+v3)"])
def test_weak_identity_nontrivial(name):
    from gaussbundle.suites import WEAK_TEST_FUNCTIONS

    rep = bz.weak_identity_check(SHIFTED, WEAK_TEST_FUNCTIONS[name], GaussianSampler(3, seed=14), 100_000)
    assert rep.passed()


def test_mc_estimate_rejects_nonfinite():
    with pytest.raises(ArithmeticError):
        bz.McEstimate.from_samples(np.array([1.0, np.inf]), 0)
