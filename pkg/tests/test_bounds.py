"""Test analytic bounds and their verifiers"""
import math

import pytest

from app.classes.election import PairDistribution
from app.classes.exceptions import VerificationError
from app.classes.mechanisms import PairIndependent, SingleWinnerIndependent, affine_single_winner
from app.services.bounds import (
    analytic_bounds,
    line_k_choice,
    line_lower_bound,
    line_two_election_check,
    pair_independent_ratio_instance3,
    random_dictator_uniqueness_check,
    seven_thirds_case_ratios,
    seven_thirds_minimax,
)
from app.services.instances import instance_simplex


# -----------------
# Line lower bounds
# -----------------


@pytest.mark.parametrize("deterministic", [True, False])
def test_line_lower_bound_small(deterministic):
    assert line_lower_bound(3, 3.0, deterministic) == pytest.approx(1.0)


def test_line_lower_bound_grows_with_sigma():
    low = line_lower_bound(30, 9.0, deterministic=True)
    high = line_lower_bound(30, 100.0, deterministic=True)
    assert high > low > 0


def test_line_lower_bound_validation():
    with pytest.raises(VerificationError):
        line_lower_bound(10, 2.5, deterministic=True)
    with pytest.raises(VerificationError):
        line_lower_bound(2, 9.0, deterministic=False)


def test_line_k_choice():
    # 2 sqrt(sigma - 1) + 1 = 5 for sigma = 5
    assert line_k_choice(20, 5.0) == 4
    assert line_k_choice(3, 5.0) == 1


def test_line_two_election_check():
    check = line_two_election_check(PairIndependent(), 9.0, 10, 2)
    assert check.bound == pytest.approx(1.75)
    assert check.ratio_gamma1 == pytest.approx(2.6)
    assert max(check.ratio_gamma1, check.ratio_gamma2) >= check.bound
    assert check.passed


def test_line_two_election_check_reports_proof_k():
    check = line_two_election_check(PairIndependent(), 9.0, 10, 2)
    # floor(10 / (2 sqrt(8) + 1)) = 1
    assert check.proof_k == line_k_choice(10, 9.0) == 1
    assert check.proof_k_bound == pytest.approx(18 / 11)
    assert check.max_bound == pytest.approx(1.75)
    assert check.max_bound >= check.proof_k_bound


# --------
# 7/3 line
# --------


def test_seven_thirds_case_ratios():
    assert seven_thirds_case_ratios(PairDistribution.point_mass((1, 2))) == pytest.approx([1, 3, 3])
    uniform = PairDistribution({(1, 2): 1 / 3, (1, 3): 1 / 3, (2, 3): 1 / 3})
    assert seven_thirds_case_ratios(uniform) == pytest.approx([7 / 3] * 3)


def test_seven_thirds_minimax():
    result = seven_thirds_minimax(0.01)
    assert result.lp_value == pytest.approx(7 / 3, abs=1e-6)
    assert result.value == pytest.approx(7 / 3, abs=0.02)
    assert all(abs(p - 1 / 3) <= 0.02 for p in result.argmin)
    assert result.lp_argmin == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-6)
    assert result.grid_points == math.comb(102, 2)


def test_seven_thirds_minimax_step():
    with pytest.raises(VerificationError):
        seven_thirds_minimax(0.1)
    with pytest.raises(VerificationError):
        seven_thirds_minimax(0.0)


# -------------------------
# Pair-Independent on simplex
# -------------------------


@pytest.mark.parametrize("r", [3.0, 5.0, 10.0])
def test_pair_independent_instance3(r):
    sigma = instance_simplex(4, r).sigma
    value = pair_independent_ratio_instance3(4, r, 3)
    assert value == pytest.approx((sigma + 2) / 3)
    assert value >= sigma / 6


def test_pair_independent_instance3_needs_multiple_of_three():
    with pytest.raises(VerificationError):
        pair_independent_ratio_instance3(4, 3.0, 4)


# ------------------------------
# Random Dictator characterization
# ------------------------------


def test_random_dictator_passes():
    check = random_dictator_uniqueness_check(4, 4, 3.0)
    assert check.passed
    assert check.affine
    assert check.slope == pytest.approx(0.25)
    assert not check.witness_found


def test_affine_control_has_witness():
    check = random_dictator_uniqueness_check(4, 4, 3.0, mechanism=affine_single_winner([0.1, 0, 0, 0]))
    assert check.affine
    assert check.witness_found
    assert check.witness_candidate == 4
    assert math.isinf(check.witness_ratio)
    assert not check.passed


def test_non_affine_control():
    squares = SingleWinnerIndependent("squares", lambda k, n_k, n, m: (n_k / n) ** 2)
    check = random_dictator_uniqueness_check(3, 3, 3.0, mechanism=squares)
    assert not check.affine
    assert check.slope is None
    assert not check.passed


def test_random_dictator_check_limits():
    with pytest.raises(VerificationError):
        random_dictator_uniqueness_check(11, 4, 3.0)
    with pytest.raises(VerificationError):
        random_dictator_uniqueness_check(4, 6, 3.0)


# --------------
# Analytic table
# --------------


def test_analytic_bounds(line3, line4, multi4):
    assert analytic_bounds("two-extremes", line3, 5) == (7.0, 7.0)
    assert analytic_bounds("two-extremes", line4, 5) == (7.0, None)
    assert analytic_bounds("two-extremes", multi4, 5) == (None, None)
    assert analytic_bounds("pair-independent", line3, 3) == (pytest.approx(13.0), pytest.approx(7 / 3))
    upper, lower = analytic_bounds("pair-independent", multi4, 3)
    assert upper == pytest.approx(1 + 6 * math.sqrt(11))
    assert lower == pytest.approx(math.sqrt(11) / 6)
    assert analytic_bounds("sequential-dictator", multi4, 4) == (pytest.approx(4 * math.sqrt(11) + 1),) * 2
    assert analytic_bounds("uniform-pairs", multi4, 4) == (None, None)
