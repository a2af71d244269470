"""Test the adversarial distortion search"""
import math

import numpy as np
import pytest

from app.classes.election import Election, LocationProfile, evaluate, is_consistent
from app.classes.exceptions import VerificationError
from app.classes.geometry import Point
from app.classes.mechanisms import PairIndependent, RandomDictator, SequentialDictator, TwoExtremes
from app.services.distortion import (
    DistortionSearch,
    Placement,
    build_placements,
    compositions,
    distortion_search,
    ratios,
)


def test_compositions():
    assert list(compositions(3, 2)) == [(0, 3), (1, 2), (2, 1), (3, 0)]
    assert len(list(compositions(5, 4))) == math.comb(8, 3)
    assert all(sum(c) == 5 for c in compositions(5, 4))


def test_ratios_zero_opt():
    weights = np.array([0.5, 0.5])
    sums = np.array([[2.0, 0.0, 0.0], [1.0, 0.0, 3.0]])
    assert ratios(weights, sums).tolist() == [1.5, 1.0, math.inf]


def test_placements_split_ties(line3):
    placements = build_placements(line3, [Point.of(-1), Point.of(0)])
    assert placements == [Placement(Point.of(-1), 1), Placement(Point.of(-1), 2), Placement(Point.of(0), 2)]


def test_two_extremes_line3(line3):
    report = distortion_search(TwoExtremes(), line3, 5)
    assert report.exhaustive
    assert report.best_ratio == pytest.approx(7.0)
    assert report.witness_expected_cost / report.witness_opt == pytest.approx(7.0)


def test_witness_reproduces_ratio(line3):
    report = distortion_search(PairIndependent(), line3, 4, random_profiles=10)
    x = LocationProfile.of(report.witness_positions)
    e = Election(line3, tuple(report.witness_actions))
    assert is_consistent(x, e)
    assert evaluate(PairIndependent()(e), x, e)["ratio"] == pytest.approx(report.best_ratio)
    assert report.best_ratio >= 1.0


def test_sequential_dictator_multi4(multi4):
    report = distortion_search(SequentialDictator(), multi4, 4)
    assert not report.exhaustive
    assert report.best_ratio == pytest.approx(2 * 2 * multi4.sigma + 1, abs=1e-6)


def test_random_dictator_single_winner(multi4):
    report = distortion_search(RandomDictator(), multi4, 3, random_profiles=20)
    assert len(report.witness_opt_pair) == 1
    assert math.isfinite(report.best_ratio)


def test_search_is_seeded(line4):
    first = distortion_search(PairIndependent(), line4, 3, seed=5, exhaustive_limit=0, random_profiles=30)
    second = distortion_search(PairIndependent(), line4, 3, seed=5, exhaustive_limit=0, random_profiles=30)
    assert first == second


def test_search_validation(line3):
    with pytest.raises(VerificationError):
        distortion_search(TwoExtremes(), line3, 1)
    with pytest.raises(VerificationError):
        DistortionSearch(TwoExtremes(), line3, 3, [], random_profiles=0, seed=1, exhaustive_limit=10, max_rounds=1)
