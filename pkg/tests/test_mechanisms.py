"""Test mechanisms"""
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.classes.election import Election
from app.classes.exceptions import MechanismError
from app.classes.geometry import CandidateSet
from app.classes.mechanisms import (
    ComplementPairIndependent,
    MixedIndependent,
    PairIndependent,
    RandomDictator,
    SequentialDictator,
    TwoExtremes,
    UniformPairs,
    VoteCounts,
    affine_single_winner,
    get_mechanism,
    is_monotone,
    list_mechanisms,
    sequential_dictator,
    two_extremes,
)


# ----------------
# Deterministic
# ----------------


@pytest.mark.parametrize("actions, expected", [
    ((1, 2, 2, 3), (1, 3)),
    ((2, 3, 3), (2, 3)),
    ((2, 2, 2), (1, 2)),
    ((1, 1), (1, 2)),
    ((3,), (1, 3)),
])
def test_two_extremes(line3, actions, expected):
    assert two_extremes(Election(line3, actions)) == expected
    assert TwoExtremes()(Election(line3, actions)).probability(expected) == 1.0


def test_two_extremes_requires_line(multi4):
    with pytest.raises(MechanismError):
        TwoExtremes()(Election(multi4, (1, 2)))


@pytest.mark.parametrize("actions, expected", [
    ((2, 2, 3, 1), (2, 3)),
    ((4, 1, 1), (1, 4)),
    ((3, 3, 3), (1, 3)),
    ((1, 1, 1), (1, 2)),
])
def test_sequential_dictator(multi4, actions, expected):
    assert sequential_dictator(Election(multi4, actions)) in (expected, expected[::-1])
    assert SequentialDictator()(Election(multi4, actions)).probability(expected) == 1.0


def test_sequential_dictator_not_anonymous(multi4):
    a = SequentialDictator()(Election(multi4, (1, 2, 3)))
    b = SequentialDictator()(Election(multi4, (3, 2, 1)))
    assert a.probability((1, 2)) == 1.0
    assert b.probability((2, 3)) == 1.0


@settings(max_examples=100)
@given(st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=8))
def test_two_extremes_brackets_the_votes(actions):
    cs = CandidateSet([-3.5, -1, 0, 0.5, 4])
    left, right = two_extremes(Election(cs, tuple(actions)))
    voted = [cs[a].coords[0] for a in actions]
    assert cs[left].coords[0] <= min(voted)
    assert cs[right].coords[0] >= max(voted)
    assert left < right


# ------------------
# Pair-Independent
# ------------------


def test_pair_independent_one_vote_each(multi4):
    d = PairIndependent()(Election(multi4, (1, 2, 3)))
    for pair in [(1, 2), (1, 3), (2, 3)]:
        assert d.probability(pair) == pytest.approx(1 / 3)
    for pair in [(1, 4), (2, 4), (3, 4)]:
        assert d.probability(pair) == pytest.approx(0.0)


def test_pair_independent_all_same(multi4):
    d = PairIndependent()(Election(multi4, (2, 2, 2)))
    assert d.probability((1, 2)) == pytest.approx(1 / 3)
    assert d.probability((2, 4)) == pytest.approx(1 / 3)
    assert d.probability((1, 3)) == 0.0


def test_pair_independent_two_supported(line3):
    d = PairIndependent()(Election(line3, (1, 1, 2)))
    assert d.probability((1, 2)) == pytest.approx(1.0)


counts = st.lists(st.integers(min_value=0, max_value=6), min_size=2, max_size=6).filter(lambda c: sum(c) > 0)


@settings(max_examples=200)
@given(counts)
def test_independent_mechanisms_are_distributions(vote_counts):
    for mech in (PairIndependent(), UniformPairs(), MixedIndependent(0.3)):
        d = mech.distribution(VoteCounts(vote_counts))
        assert sum(p for _, p in d.items()) == pytest.approx(1.0)
        assert all(p >= -1e-12 for _, p in d.items())


split_counts = st.tuples(
    st.integers(min_value=2, max_value=30), st.integers(min_value=0, max_value=29), st.integers(min_value=0, max_value=29),
).filter(lambda t: t[1] + t[2] <= t[0] and max(t[1], t[2]) < t[0])


@settings(max_examples=200)
@given(split_counts, st.integers(min_value=3, max_value=8))
def test_independent_probability_is_symmetric(split, m):
    n, a, b = split
    for mech in (PairIndependent(), UniformPairs(), MixedIndependent(0.3)):
        assert mech.probability(1, 2, a, b, n, m) == pytest.approx(mech.probability(2, 1, b, a, n, m))


@settings(max_examples=50)
@given(st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=5))
def test_anonymous_mechanisms_ignore_order(actions):
    cs = CandidateSet([-2, 0, 1, 2])
    for mech in (PairIndependent(), TwoExtremes(), RandomDictator()):
        reference = mech(Election(cs, tuple(actions))).probs
        for shuffled in set(permutations(actions)):
            assert mech(Election(cs, shuffled)).probs == pytest.approx(reference)


# ----------
# Monotonicity
# ----------


@pytest.mark.parametrize("n, m", [(1, 3), (3, 4), (6, 4), (5, 5)])
def test_pair_independent_monotone(n, m):
    assert is_monotone(PairIndependent(), n, m)
    assert is_monotone(UniformPairs(), n, m)


def test_complement_not_monotone():
    assert not is_monotone(ComplementPairIndependent(), 4, 4)


def test_monotone_limits():
    with pytest.raises(MechanismError):
        is_monotone(PairIndependent(), 21, 4)
    with pytest.raises(MechanismError):
        is_monotone(PairIndependent(), 3, 7)


def test_complement_needs_three_candidates():
    with pytest.raises(MechanismError):
        ComplementPairIndependent()(Election(CandidateSet([0, 1]), (1, 2)))


# --------------
# Single winner
# --------------


def test_random_dictator(multi4):
    e = Election(multi4, (1, 1, 4))
    d = RandomDictator()(e)
    assert d.size == 1
    assert d.probability((1,)) == pytest.approx(2 / 3)
    assert RandomDictator().exact_probabilities(e) == {1: Fraction(2, 3), 2: 0, 3: 0, 4: Fraction(1, 3)}


def test_affine_zero_intercepts_is_random_dictator(multi4):
    e = Election(multi4, (1, 2, 2, 4))
    affine = affine_single_winner([0.0] * 4)(e)
    assert affine.probs == pytest.approx(RandomDictator()(e).probs)


# --------
# Registry
# --------


def test_registry():
    assert set(list_mechanisms()) >= {"two-extremes", "pair-independent", "random-dictator", "sequential-dictator"}
    assert get_mechanism("mixed-independent", lam=0.25).lam == 0.25
    with pytest.raises(MechanismError):
        get_mechanism("borda")
    with pytest.raises(MechanismError):
        MixedIndependent(1.5)
