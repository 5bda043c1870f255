import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import exact_b
from qjk_secretary.core import (ProblemSpec, SpecError, b_table, b_value, flatten, format_spec,
                                offline_optimum, parse_spec_text, position_of, unflatten,
                                validate_spec)


def test_valid_spec_passes_through():
    spec = ProblemSpec(10, 2, 2, 2, (1, 1))
    assert validate_spec(spec) is spec


@pytest.mark.parametrize("args, message", [
    ((10, 3, 1, 1), "n not multiple of Q"),
    ((10, 2, 1, 2, (1, 2)), "weights increasing"),
    ((10, 11, 1, 1), "Q"),
    ((5, 1, 6, 1), "J"),
    ((5, 1, 1, 6), "K"),
    ((0, 1, 1, 1), "positive"),
    ((10, 1, 1, 2, (1,)), "weight"),
    ((10, 1, 1, 2, (1, -1)), "positive"),
])
def test_invalid_specs(args, message):
    with pytest.raises(SpecError, match=message):
        validate_spec(ProblemSpec(*args))


def test_first_violation_is_reported():
    # both "not a multiple" and "increasing" hold; the divisibility check comes first
    with pytest.raises(SpecError, match="n not multiple of Q"):
        validate_spec(ProblemSpec(10, 3, 1, 2, (1, 2)))


@pytest.mark.parametrize("J, K, weights, W", [
    (1, 3, (1, 1, 1), 1.0), (3, 2, (2, 1), 3.0), (2, 2, (1, 1), 2.0)])
def test_offline_optimum(J, K, weights, W):
    assert offline_optimum(ProblemSpec(10, 1, J, K, weights)) == W


def test_b_examples():
    spec = ProblemSpec(6, 1, 1, 2)
    assert b_value(spec, 3, 1) == pytest.approx(1.6, rel=1e-12)
    spec = ProblemSpec(50, 1, 1, 3, (3.0, 2.0, 0.5))
    for k in (1, 2, 3):
        assert b_value(spec, 50, k) == pytest.approx(spec.weights[k - 1], rel=1e-12)
    assert b_value(spec, 1, 1) == pytest.approx(5.5, rel=1e-12)


def test_b_zero_when_rank_exceeds_position():
    spec = ProblemSpec(30, 1, 1, 3)
    assert b_value(spec, 1, 2) == 0.0
    assert b_value(spec, 2, 3) == 0.0


def test_b_out_of_range():
    spec = ProblemSpec(10, 1, 1, 2)
    for i, k in ((0, 1), (11, 1), (1, 0), (1, 3)):
        with pytest.raises(IndexError):
            b_value(spec, i, k)


@pytest.mark.parametrize("n, K, weights", [
    (7, 3, (1, 1, 1)), (40, 4, (4, 3, 2, 1)), (200, 3, (1, 0.5, 0.25)), (200, 5, ())])
def test_b_table_matches_fraction_oracle(n, K, weights):
    spec = ProblemSpec(n, 1, 1, K, weights)
    table = b_table(spec)
    for i in range(1, n + 1):
        for k in range(1, K + 1):
            want = float(exact_b(n, K, spec.weights, i, k))
            got = table[i - 1, k - 1]
            assert got == pytest.approx(want, rel=1e-10, abs=0 if want else 1e-300)
            assert b_value(spec, i, k) == pytest.approx(want, rel=1e-10)


def test_b_table_horizon_prefix():
    spec = ProblemSpec(100, 1, 1, 3)
    assert np.array_equal(b_table(spec, 40), b_table(spec)[:40])


def test_b_large_n_is_finite():
    table = b_table(ProblemSpec(10000, 1, 1, 30))
    assert np.isfinite(table).all()
    assert table[-1] == pytest.approx(np.ones(30))


@st.composite
def specs(draw):
    n = draw(st.integers(2, 200))
    K = draw(st.integers(1, min(n, 6)))
    w = sorted(draw(st.lists(st.floats(0.01, 10.0), min_size=K, max_size=K)), reverse=True)
    return ProblemSpec(n, 1, 1, K, tuple(w))


@settings(max_examples=60, deadline=None)
@given(specs())
def test_position_weighted_b_is_nondecreasing(spec):
    b = b_table(spec)
    i = np.arange(1, spec.n + 1, dtype=float)[:, None]
    lhs, rhs = (i * b)[:-1], (i * b)[1:]
    assert np.all(lhs <= rhs * (1 + 1e-10) + 1e-300)


@settings(max_examples=60, deadline=None)
@given(specs())
def test_b_nonincreasing_in_rank(spec):
    b = b_table(spec)
    assert np.all(b[:, :-1] >= b[:, 1:] - 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 50), st.integers(1, 50))
def test_flatten_bijection(Q, m):
    n = Q * m
    ts = [flatten(*unflatten(t, Q), Q) for t in range(1, n + 1)]
    assert ts == list(range(1, n + 1))
    q, i = unflatten(n, Q)
    assert (q, i) == (Q, m)
    assert np.array_equal(position_of(np.arange(1, n + 1), Q), (np.arange(n) // Q) + 1)


def test_spec_file_round_trip():
    spec = ProblemSpec(60, 2, 2, 3, (1.0, 0.5, 0.25))
    assert parse_spec_text(format_spec(spec)) == spec
    text = "# tiny\nn=10\nQ=2\nJ=2\nK=2   # equal weights\n"
    assert parse_spec_text(text) == ProblemSpec(10, 2, 2, 2)


@pytest.mark.parametrize("text, message", [
    ("n=10\nQ=1\nJ=1\n", "missing keys: K"),
    ("n=10\nQ=1\nJ=1\nK=1\nL=2\n", "unknown key"),
    ("n=ten\nQ=1\nJ=1\nK=1\n", "non-integer"),
    ("n=10\nQ=1\nJ=1\nK=2\nweights=1,x\n", "bad weights"),
    ("n=10\nQ=1\nJ=1\nK=1\njunk\n", "expected key=value"),
    ("n=10\nQ=3\nJ=1\nK=1\n", "n not multiple of Q"),
])
def test_spec_file_errors(text, message):
    with pytest.raises(SpecError, match=message):
        parse_spec_text(text)
