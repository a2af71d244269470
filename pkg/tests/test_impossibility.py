"""Test the deterministic impossibility certificate"""
import pytest

from app.services.impossibility import (
    ONE_EACH,
    PAIRS,
    DeterministicImpossibility,
    SumConstraint,
    deterministic_impossibility,
    proof_profiles,
    relabel,
    var_name,
)


@pytest.fixture(scope="module")
def certificate():
    return deterministic_impossibility(3.0)


def test_var_name():
    assert var_name((1, 2), (3, 1, 0, 0)) == "q12(3,1)"
    assert var_name((2, 4), ONE_EACH) == "q24(1,1)"


def test_sum_constraint_text():
    con = SumConstraint(("q12(1,1)", "q13(1,1)"), ONE_EACH, "normalization")
    assert str(con) == "q12(1,1) + q13(1,1) = 1"
    assert con.describe() == "normalization (1, 1, 1, 1): q12(1,1) + q13(1,1) = 1"


def test_forcing_constraints():
    system = DeterministicImpossibility(3.0)
    forcing = {con.counts: con.variables for con in system.constraints if con.kind == "forcing"}
    # Three voters on y_1 and one on y_2: only (y_1, y_2) has zero cost
    assert forcing[(3, 1, 0, 0)] == ("q12(3,1)",)
    assert (1, 1, 1, 1) not in forcing
    assert all(sum(1 for c in counts if c) == 2 for counts in forcing)


def test_certificate_unsat(certificate):
    assert certificate.status == "UNSAT"
    assert certificate.z3_integer == "unsat"
    assert certificate.z3_relaxation == "sat"
    assert len(certificate.branches) == len(PAIRS)
    assert all(branch.closed for branch in certificate.branches)


def test_first_branch_parity(certificate):
    branch = certificate.branches[0]
    assert branch.name == "case-1:(1, 2)"
    assert branch.x2_pair == (1, 2)
    assert certificate.parity_equation == "2(q12(1,2) + q23(2,1) + q24(2,1)) = 3"
    assert len(branch.equations) == 3


def test_branch_names(certificate):
    names = [b.name for b in certificate.branches]
    assert names[2] == "case-2:(1, 4)"
    assert sum(name.startswith("case-2") for name in names) == 3


def test_relaxation_witness(certificate):
    assert certificate.relaxation_witness
    assert all(0.0 <= v <= 1.0 for v in certificate.relaxation_witness.values())
    assert any("Pair-Independent" in note for note in certificate.notes)
    assert any("q12(3,1)" in note for note in certificate.notes)


def test_certificate_other_radius():
    assert deterministic_impossibility(5.0).status == "UNSAT"


def test_relabel_keeps_y4():
    assert relabel((1, 2)) == {1: 1, 2: 2, 3: 3, 4: 4}
    assert relabel((1, 4)) == {1: 1, 2: 2, 3: 3, 4: 4}
    assert relabel((2, 3)) == {1: 2, 2: 3, 3: 1, 4: 4}
    assert relabel((3, 4)) == {1: 3, 2: 1, 3: 2, 4: 4}


def test_proof_profiles_counts():
    profiles = proof_profiles((1, 4))
    assert profiles["x^1"] == (3, 1, 0, 0)
    assert profiles["x^2"] == ONE_EACH
    assert profiles["x^6"] == (1, 0, 1, 2)
    assert profiles["x^7"] == (1, 1, 0, 2)
    assert profiles["x^8"] == (0, 1, 1, 2)
    assert proof_profiles((2, 4))["x^6"] == (0, 1, 1, 2)


def test_first_branch_uses_profiles_x3_to_x5(certificate):
    equations = certificate.branches[0].equations
    assert sorted(eq.split(" ")[1] for eq in equations) == ["x^3", "x^4", "x^5"]


def test_case_2_parity(certificate):
    branch = next(b for b in certificate.branches if b.name == "case-2:(1, 4)")
    assert branch.closed
    assert "2(q14(1,2) + q24(1,2) + q34(1,2)) = 3" in branch.reason
    assert sorted(eq.split(" ")[1] for eq in branch.equations) == ["x^6", "x^7", "x^8"]


def test_every_branch_closes_by_parity(certificate):
    for branch in certificate.branches:
        assert branch.reason.startswith("paridad")
        assert len(branch.equations) == 3
