import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussbundle.corpus import random_tree, rng_for
from gaussbundle.fieldspec import (BinOp, ExprField, Func, Herm, Neg, Num, ParseError, Var, certify, differentiate,
                                   evaluate, parse, parse_field, simplify, to_text)


def test_parse_examples():
    e = parse("H(2,1) + 0.5*x1", 1)
    assert e == BinOp("+", Herm(2, 1), BinOp("*", Num(0.5), Var(1)))
    assert parse("sin(x1)*cos(x2)", 2) == BinOp("*", Func("sin", Var(1)), Func("cos", Var(2)))


@pytest.mark.parametrize("src,pos", [("x3", 0), ("x1 +", 4), ("2 * (x1", 7), ("foo(x1)", 0), ("x1 $ 2", 3),
                                     ("H(2,3)", 4)])
def test_parse_errors_carry_position(src, pos):
    with pytest.raises(ParseError) as err:
        parse(src, 2)
    assert err.value.pos == pos


def test_index_out_of_range_message():
    with pytest.raises(ParseError, match="range"):
        parse("x3", 2)


def test_precedence_and_unary_minus():
    x = np.array([[2.0, 3.0]])
    assert evaluate(parse("-x1^2", 2), x)[0] == -4
    assert evaluate(parse("2*x1 - x2/3", 2), x)[0] == pytest.approx(3.0)
    assert evaluate(parse("x1 - x2 - 1", 2), x)[0] == -2
    assert evaluate(parse("neg(x2)", 2), x)[0] == -3


def test_differentiate_examples():
    assert differentiate(parse("H(3,1)", 1), 0) == BinOp("*", Num(3.0), Herm(2, 1))
    assert differentiate(parse("sin(x1)", 1), 0) == Func("cos", Var(1))
    assert differentiate(parse("x1*x2", 2), 1) == Var(1)


def test_certify_examples():
    c = certify(parse("sin(x1)+0.3*cos(x2)", 2), 2)
    assert c.kind == "bounded" and c.bound == pytest.approx(1.3)
    c = certify(parse("0.2*H(2,1)", 1), 1)
    assert c.kind == "quadratic" and c.matrix[0, 0] == pytest.approx(0.2)
    assert certify(parse("x1^3", 1), 1).kind == "unbounded"
    assert certify(parse("exp(sin(x1))", 1), 1).kind == "unbounded"
    assert certify(parse("0.1*x1*x2 + x1", 2), 2).kind == "quadratic"


def test_simplify_rules():
    assert simplify(parse("0 + x1*1", 1)) == Var(1)
    assert simplify(parse("x1^0", 1)) == Num(1.0)
    assert simplify(parse("0 - x1", 1)) == Neg(Var(1))
    assert simplify(parse("2*3 + 1", 1)) == Num(7.0)
    assert simplify(Neg(Neg(Var(1)))) == Var(1)


def test_expr_field_gradients_match_finite_differences():
    f = parse_field("sin(x1)*x2^2 + tanh(0.5*x1 - x2) + H(3,2)", 2)
    x = np.array([[0.3, -0.7], [1.2, 0.4]])
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (f(x + e) - f(x - e)) / (2 * h)
        np.testing.assert_allclose(f.grad(x)[:, i], fd, rtol=1e-7, atol=1e-8)
    hess = f.hessian(x)
    np.testing.assert_allclose(hess, np.transpose(hess, (0, 2, 1)))


def test_zero_denominator_raises():
    with pytest.raises(ZeroDivisionError):
        evaluate(parse("1/(x1-x1)", 1), np.array([[1.0]]))


def test_round_trip_on_1000_random_trees():
    rng = rng_for(0, 9)
    x = np.array([[0.3, -1.2, 0.8], [1.1, 0.5, -0.4]])
    for _ in range(1000):
        e = random_tree(3, 6, rng)
        back = parse(to_text(e), 3)
        assert back == e, to_text(e)
        with np.errstate(all="ignore"):
            try:
                a = evaluate(e, x)
            except ZeroDivisionError:
                continue
            np.testing.assert_array_equal(evaluate(back, x), a)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_round_trip_property(seed, dim):
    e = random_tree(dim, 6, rng_for(seed, 1))
    assert parse(to_text(e), dim) == e


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_symbolic_derivative_matches_difference_quotient(seed):
    rng = rng_for(seed, 2)
    e = random_tree(2, 4, rng)
    x = np.array([[0.37, -0.61]])
    h = 1e-5
    with np.errstate(all="ignore"):
        try:
            d = evaluate(differentiate(e, 0), x)[0]
            fd = (evaluate(e, x + [h, 0]) - evaluate(e, x - [h, 0]))[0] / (2 * h)
        except ZeroDivisionError:
            return
    if np.isfinite(d) and np.isfinite(fd) and abs(d) < 1e4:
        assert d == pytest.approx(fd, rel=1e-4, abs=1e-4)


def test_expr_field_certificate_and_text():
    f = parse_field("0.2*H(2,1) + sin(x1)", 1)
    assert isinstance(f, ExprField)
    assert f.certificate().kind == "quadratic"
    assert parse(f.text, 1) == f.expr
