import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussbundle.corpus import corpus_fields, random_tilt, rng_for
from gaussbundle.expfamily import check_admissible
from gaussbundle.fieldspec import parse
from gaussbundle.suites import SUITES, run_suite


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4), st.sampled_from(["bounded", "linear", "quadratic", "mixed"]))
def test_random_tilts_are_admissible_and_round_trip(seed, dim, kind):
    u = random_tilt(dim, rng_for(seed), kind)
    check_admissible(u)
    assert parse(u.text, dim) == u.expr


def test_corpus_is_reproducible():
    a = [str(f) for f in corpus_fields(2, 10, seed=3)]
    b = [str(f) for f in corpus_fields(2, 10, seed=3)]
    assert a == b
    assert a != [str(f) for f in corpus_fields(2, 10, seed=4)]


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")


def test_suite_results_are_deterministic():
    a = [c.as_dict() for c in run_suite("charts", dim=1, seed=2)]
    b = [c.as_dict() for c in run_suite("charts", dim=1, seed=2)]
    assert a == b


@pytest.mark.parametrize("name", sorted(set(SUITES) - {"boltzmann"}))
def test_suites_pass_in_dimension_3(name):
    bad = [c.describe() for c in run_suite(name, dim=3, order=30, seed=1) if c.passed is False]
    assert not bad, bad[:3]
