import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from judgebench.core import (
    DecisionProfile,
    DecisionVector,
    PairAnd,
    PairOr,
    TOr,
    Verdict,
    build_threshold_formula,
    compatible,
    dualise,
    eval_threshold_formula,
    is_monotone,
    majority,
    printed_phi_2_of_4,
    printed_phi_3_of_4,
    threshold_oracle,
)
from judgebench.errors import EvaluationError, ParameterError
from oracle import compatible_oracle, count_majority

odd_vectors = st.integers(0, 4).flatmap(lambda n: st.lists(st.integers(0, 1), min_size=2 * n + 1, max_size=2 * n + 1))


def test_majority_examples():
    assert majority((1, 1, 0)) == 1
    assert majority((0, 0, 0, 0, 0)) == 0
    assert majority((1, 0, 1, 0, 1)) == 1


def test_majority_rejects_even_and_non_bits():
    with pytest.raises(ParameterError):
        majority((1, 0))
    with pytest.raises(ParameterError):
        majority((1, 2, 0))


@given(odd_vectors)
def test_majority_matches_counting_loop(bits):
    assert majority(bits) == count_majority(bits)


def test_threshold_oracle_examples():
    assert threshold_oracle((1, 0, 1, 0), 2) == 1
    assert threshold_oracle((0, 0, 0, 0), 0) == 1
    assert threshold_oracle((1, 1, 0, 1), 3) == 1
    with pytest.raises(ParameterError):
        threshold_oracle((1, 0), 3)


def test_build_threshold_small_cases():
    assert build_threshold_formula(1, 2) == PairAnd(1)
    f = build_threshold_formula(2, 2)
    assert eval_threshold_formula(f, (1, 0, 1, 0)) == 1
    assert eval_threshold_formula(build_threshold_formula(2, 3), (1, 0, 1, 0)) == 0
    with pytest.raises(ParameterError):
        build_threshold_formula(2, 5)
    with pytest.raises(ParameterError):
        build_threshold_formula(0, 0)


@pytest.mark.parametrize("n_pairs", [1, 2, 3])
def test_threshold_formula_exhaustive(n_pairs):
    for k in range(2 * n_pairs + 1):
        f = build_threshold_formula(n_pairs, k)
        assert is_monotone(f)
        for dv in itertools.product((0, 1), repeat=2 * n_pairs):
            assert eval_threshold_formula(f, dv) == int(sum(dv) >= k), (n_pairs, k, dv)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_duality(n):
    up = build_threshold_formula(n, n + 1)
    down = dualise(build_threshold_formula(n, n))
    for dv in itertools.product((0, 1), repeat=2 * n):
        assert eval_threshold_formula(up, dv) == eval_threshold_formula(down, dv)


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.just(n),
    st.integers(0, 2 * n),
    st.lists(st.integers(0, 1), min_size=2 * n, max_size=2 * n),
    st.integers(0, 2 * n - 1),
)))
def test_threshold_monotone_under_bit_raise(case):
    n, k, dv, pos = case
    f = build_threshold_formula(n, k)
    raised = list(dv)
    raised[pos] = 1
    assert eval_threshold_formula(f, raised) >= eval_threshold_formula(f, dv)


def test_eval_threshold_examples():
    assert eval_threshold_formula(PairAnd(1), (1, 1)) == 1
    assert eval_threshold_formula(PairOr(1), (0, 0)) == 0
    assert eval_threshold_formula(TOr(PairAnd(1), PairOr(2)), (0, 1, 1, 0)) == 1
    with pytest.raises(EvaluationError):
        eval_threshold_formula(PairAnd(3), (1, 1, 0, 0))


def test_printed_formulas_disagree_with_oracle():
    assert printed_phi_2_of_4((1, 0, 1, 0)) == 0
    assert threshold_oracle((1, 0, 1, 0), 2) == 1
    assert printed_phi_3_of_4((1, 0, 1, 0)) == 1
    assert threshold_oracle((1, 0, 1, 0), 3) == 0


def test_compatible_examples():
    assert compatible(0, 1, 1, 0, 0, 3) is False
    assert compatible(0, 1, 1, 0, 1, 3) is True
    assert compatible(0, 1, 0, 0, 1, 5) is True
    with pytest.raises(ParameterError):
        compatible(1, 1, 0, 0, 1, 3)


@pytest.mark.parametrize("total", [3, 5, 7])
def test_compatible_matches_enumeration(total):
    for i, j in itertools.permutations(range(total), 2):
        for d_i, v in itertools.product((0, 1), repeat=2):
            want = compatible_oracle(i, j, d_i, v, total)
            assert compatible(i, j, d_i, 0, v, total) == want
            assert compatible(i, j, d_i, 1, v, total) == want


def test_domain_types():
    dv = DecisionVector((1, 0, 1))
    assert dv.n == 1 and len(dv) == 3 and list(dv) == [1, 0, 1]
    with pytest.raises(ParameterError):
        DecisionVector(())
    prof = DecisionProfile((0, 1, 1))
    assert prof.d(1) == 1 and prof.text == "011"
    assert len(DecisionProfile.all(3)) == 8
    assert Verdict.from_bit(None).label == "unknown"
    assert Verdict.from_bit(1) is Verdict.GUILTY and Verdict.GUILTY.bit == 1
