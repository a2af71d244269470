"""Test elections, consistency and costs"""
import logging
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.classes.election import (
    CommitteeDistribution,
    Election,
    LocationProfile,
    PairDistribution,
    committee_cost,
    evaluate,
    expected_social_cost,
    is_consistent,
    opt,
    ratio,
    social_cost,
    truthful_election,
)
from app.classes.exceptions import MechanismError, ProfileError
from app.classes.geometry import Point
from app.services.instances import instance_line3, instance_multi4

LINE3 = instance_line3()
MULTI4 = instance_multi4(3.0)

coordinate = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
line_points = coordinate.map(lambda v: (v,))
space_points = st.tuples(coordinate, coordinate, coordinate)


# --------
# Election
# --------


def test_election_validation(line3):
    with pytest.raises(ProfileError):
        Election(line3, ())
    with pytest.raises(ProfileError):
        Election(line3, (1, 4))
    with pytest.raises(ProfileError):
        Election(line3, (0,))


def test_election_helpers(line3):
    e = Election(line3, (3, 1, 1))
    assert e.n == 3
    assert e.tallies() == (2, 0, 1)
    assert Election.from_counts(line3, (2, 0, 1)).actions == (1, 1, 3)
    assert e.with_action(1, 2).actions == (2, 1, 1)
    with pytest.raises(ProfileError):
        e.with_action(4, 2)


# -----------
# Consistency
# -----------


@pytest.mark.parametrize("actions, expected", [
    ((1, 2, 2), True),
    ((2, 2, 3), True),   # both voters on a tie
    ((3, 2, 2), False),
])
def test_consistency(line3, actions, expected):
    x = LocationProfile.of([-1, 0, 1])
    assert is_consistent(x, Election(line3, actions)) is expected


def test_consistency_size_mismatch(line3):
    with pytest.raises(ProfileError):
        is_consistent(LocationProfile.of([0, 0]), Election(line3, (2,)))


def test_consistency_dimension_mismatch(multi4):
    with pytest.raises(ProfileError):
        is_consistent(LocationProfile.of([0.0]), Election(multi4, (1,)))


def test_truthful_election_breaks_ties_low(line3):
    e = truthful_election(LocationProfile.of([-1, 0.9, 1]), line3)
    assert e.actions == (1, 2, 2)


# -----
# Costs
# -----


def test_two_extremes_worst_case_costs(line3):
    x = LocationProfile.of([-1, 0, 0, 0, 2])
    assert social_cost((1, 2), x, line3) == pytest.approx(3.0)
    assert social_cost((1, 3), x, line3) == pytest.approx(7.0)
    assert social_cost((2, 3), x, line3) == pytest.approx(1.0)
    assert opt(x, line3) == ((2, 3), pytest.approx(1.0))


def test_opt_keeps_first_pair_on_ties(line3):
    pair, cost = opt(LocationProfile.of([0.0]), line3)
    assert pair == (1, 2)
    assert cost == 0.0


def test_opt_single_winner(multi4):
    x = LocationProfile((multi4[2], multi4[2], multi4[3]))
    committee, cost = opt(x, multi4, committee_size=1)
    assert committee == (2,)
    assert cost == pytest.approx(math.sqrt(2))
    with pytest.raises(ProfileError):
        opt(x, multi4, committee_size=3)


def test_committee_cost(multi4):
    p = Point.of(0.5, 0.5, 0.0)
    assert committee_cost((1,), p, multi4) == pytest.approx(math.sqrt(0.5))
    assert committee_cost((1, 4), p, multi4) == pytest.approx(math.sqrt(0.5))
    with pytest.raises(ProfileError):
        committee_cost((1, 1), p, multi4)


@pytest.mark.parametrize("cost, best, expected", [
    (3.0, 1.5, 2.0),
    (0.0, 0.0, 1.0),
    (1.0, 0.0, math.inf),
])
def test_ratio_zero_opt_convention(cost, best, expected):
    assert ratio(cost, best) == expected


# -------------
# Distributions
# -------------


def test_distribution_validation():
    with pytest.raises(MechanismError):
        CommitteeDistribution({(1, 2): 0.5, (1, 3): 0.4})
    with pytest.raises(MechanismError):
        CommitteeDistribution({(1, 2): 0.5, (3,): 0.5})
    with pytest.raises(MechanismError):
        CommitteeDistribution({(1, 2): 1.5, (1, 3): -0.5})
    with pytest.raises(MechanismError):
        PairDistribution({(1,): 1.0})
    with pytest.raises(ProfileError):
        PairDistribution({(2, 2): 1.0})


def test_distribution_normalizes_keys():
    d = PairDistribution({(3, 1): 0.25, (2, 1): 0.75})
    assert list(d.probs) == [(1, 2), (1, 3)]
    assert d.probability((2, 1)) == 0.75
    assert d.probability((2, 3)) == 0.0
    assert d.as_dict() == {"1,2": 0.75, "1,3": 0.25}
    assert not d.is_deterministic()


def test_expected_cost_and_evaluate(line3):
    x = LocationProfile.of([-1, 0, 0, 0, 2])
    e = Election(line3, (1, 2, 2, 2, 3))
    d = PairDistribution({(1, 3): 0.5, (2, 3): 0.5})
    assert expected_social_cost(d, x, line3) == pytest.approx(4.0)
    result = evaluate(d, x, e)
    assert result["opt_pair"] == (2, 3)
    assert result["ratio"] == pytest.approx(4.0)


def test_truthful_tie_is_logged(line3, caplog):
    with caplog.at_level(logging.WARNING):
        truthful_election(LocationProfile.of([-1.0, 0.5]), line3)
    assert [r.levelno for r in caplog.records] == [logging.WARNING]
    assert "Votante 1" in caplog.records[0].getMessage()


# -----------------------
# Properties of the costs
# -----------------------


def _check_costs(cs, positions, extra):
    x = LocationProfile.of(positions)
    best_pair, best = opt(x, cs)
    assert social_cost(best_pair, x, cs) == pytest.approx(best)
    grown = x.appended(extra)
    for pair in cs.pairs():
        cost = social_cost(pair, x, cs)
        assert best <= cost + 1e-9
        # Un votante más nunca reduce el coste
        assert social_cost(pair, grown, cs) >= cost - 1e-9
        point_mass = PairDistribution.point_mass(pair)
        assert expected_social_cost(point_mass, x, cs) == pytest.approx(cost)
    assert is_consistent(x, truthful_election(x, cs))


@settings(max_examples=100)
@given(st.lists(line_points, min_size=1, max_size=6), line_points)
def test_cost_properties_line(positions, extra):
    _check_costs(LINE3, positions, extra)


@settings(max_examples=100)
@given(st.lists(space_points, min_size=1, max_size=5), space_points)
def test_cost_properties_multi4(positions, extra):
    _check_costs(MULTI4, positions, extra)
