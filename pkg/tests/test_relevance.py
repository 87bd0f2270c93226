import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import scalar
from rankmem import EmptyInputError, NumericError, combined_score, rank_descending, relevance_scores
from rankmem.exceptions import DimensionError

finite = st.floats(-1e3, 1e3, allow_nan=False)


@st.composite
def q_and_keys(draw, max_m=16, max_d=8):
    d = draw(st.integers(1, max_d))
    m = draw(st.integers(1, max_m))
    q = draw(arrays(np.float64, d, elements=finite))
    keys = draw(arrays(np.float64, (m, d), elements=finite))
    return q, keys


def test_singleton_is_one():
    assert relevance_scores([0.3, -2.0], [[5.0, 1.0]]).tolist() == [1.0]


def test_symmetric_pair():
    assert relevance_scores([1.0, 0.0], [[1.0, 0.0], [1.0, 0.0]]).tolist() == [0.5, 0.5]


def test_scalar_example():
    # logits (1/sqrt 2, 0): e^0.70711 / (e^0.70711 + 1)
    w = relevance_scores([1.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
    assert w == pytest.approx([0.6698, 0.3302], abs=1e-4)


def test_errors():
    with pytest.raises(EmptyInputError):
        relevance_scores([1.0, 0.0], np.empty((0, 2)))
    with pytest.raises(NumericError):
        relevance_scores([np.nan, 0.0], [[1.0, 0.0]])
    with pytest.raises(NumericError):
        relevance_scores([1.0, 0.0], [[np.inf, 0.0]])
    with pytest.raises(DimensionError):
        relevance_scores([1.0, 0.0], [[1.0, 0.0, 0.0]])


def test_large_logits_do_not_overflow():
    w = relevance_scores([1e4, 0.0], [[1e4, 0.0], [-1e4, 0.0], [1e4 - 1, 0.0]])
    assert np.all(np.isfinite(w))
    assert w.sum() == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(q_and_keys())
def test_matches_scalar_oracle_and_normalizes(case):
    q, keys = case
    w = relevance_scores(q, keys)
    ref = scalar.softmax_scaled(q.tolist(), keys.tolist())
    assert np.allclose(w, ref, rtol=0, atol=1e-9)
    assert abs(w.sum() - 1.0) < 1e-9
    assert np.all(w <= 1.0)


@settings(max_examples=100, deadline=None)
@given(q_and_keys(), st.floats(-50, 50))
def test_shift_invariance(case, c):
    # adding c*sqrt(d)*q/|q|^2 to every key shifts every logit by the same c
    q, keys = case
    qq = q @ q
    assume(qq > 1e-6)
    shifted = keys + (c * np.sqrt(q.shape[0]) / qq) * q
    assert np.allclose(relevance_scores(q, keys), relevance_scores(q, shifted), atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(q_and_keys())
def test_argmax_monotonicity(case):
    q, keys = case
    dots = keys @ q
    w = relevance_scores(q, keys)
    assert w[np.argmax(dots)] == w.max()


def test_rank_examples():
    assert rank_descending([0.2, 0.5, 0.3]).tolist() == [1, 2, 0]
    assert rank_descending([0.5, 0.5]).tolist() == [0, 1]


def test_rank_against_sort_oracle():
    rng = np.random.default_rng(64)
    for _ in range(64):
        m = int(rng.integers(1, 40))
        # coarse values so ties are common
        s = rng.integers(0, 6, size=m) / 5.0
        expected = sorted(range(m), key=lambda i: (-s[i], i))
        assert rank_descending(s).tolist() == expected


@given(arrays(np.float64, st.integers(1, 30), elements=st.floats(0, 1)))
def test_rank_is_permutation(s):
    order = rank_descending(s)
    assert sorted(order.tolist()) == list(range(len(s)))


def test_combined_score_examples():
    assert combined_score(0.0, [0.3, 0.7]) == 0.0
    assert combined_score(1.0, [0.2, 0.8]) == 0.8
    assert combined_score(0.5, [0.6698, 0.3302]) == pytest.approx(0.3349, abs=1e-4)
    with pytest.raises(EmptyInputError):
        combined_score(1.0, [])


@given(st.floats(0, 1), st.floats(0, 1), arrays(np.float64, st.integers(1, 8), elements=st.floats(0.01, 1)))
def test_combined_score_monotone_in_sim(a, b, s):
    lo, hi = sorted((a, b))
    assert combined_score(lo, s) <= combined_score(hi, s)
