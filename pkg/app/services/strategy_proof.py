import logging
from itertools import combinations_with_replacement, product
from typing import Iterator, Sequence

import numpy as np

from app.classes.election import Committee, CommitteeDistribution, Election, LocationProfile, expected_social_cost
from app.classes.exceptions import VerificationError
from app.classes.geometry import CandidateSet, Point
from app.classes.mechanisms import Mechanism
from app.classes.reports import SPReport, SPViolation
from app.config import Config
from app.services.test_points import build_test_points

logger = logging.getLogger(__name__)

# Violaciones que se guardan con detalle; el resto solo se cuentan
MAX_RECORDED_VIOLATIONS = 50


class StrategyProofChecker:
    """
    Exhaustive strategy-proofness check of a mechanism over a finite set of test points.

    For every context (actions of the other voters plus the seat of the tested voter)
    up to ``max_n`` voters, the expected cost of all m actions is computed once for all
    test points; a violation is a truthful action (any member of the point's tie set)
    beaten by some deviation by more than Config.TOLERANCE.

    Attributes:
        mechanism: the Mechanism under test
        candidates: CandidateSet of the instance
        points: test positions of the deviating voter
    """
    def __init__(self, mechanism: Mechanism, candidates: CandidateSet, points: Sequence[Point]):
        if not points:
            raise VerificationError("Error: no hay puntos de prueba.")
        self.mechanism = mechanism
        self.candidates = candidates
        self.points = list(points)

        # Distancias P x m y máscara de acciones veraces (empates incluidos)
        self.distances = candidates.distances_from(self.points)
        nearest = self.distances.min(axis=1, keepdims=True)
        self.truthful = self.distances <= nearest + Config.TOLERANCE
        self._committee_costs: dict[Committee, np.ndarray] = {}

    # --- Metodos privados ---
    def _committee_cost(self, committee: Committee) -> np.ndarray:
        cost = self._committee_costs.get(committee)
        if cost is None:
            cost = self.distances[:, [k - 1 for k in committee]].min(axis=1)
            self._committee_costs[committee] = cost
        return cost

    def _expected_costs(self, d: CommitteeDistribution) -> np.ndarray:
        total = np.zeros(len(self.points))
        for committee, p in d.items():
            if p > 0.0:
                total += p * self._committee_cost(committee)
        return total

    def _contexts(self, n: int) -> Iterator[tuple[tuple[int, ...], int]]:
        """(acciones del resto, asiento 0-based del votante probado)."""
        m = self.candidates.m
        if self.mechanism.anonymous:
            # Con anonimato basta un representante por multiconjunto y un asiento
            for others in combinations_with_replacement(range(1, m + 1), n - 1):
                yield others, n - 1
        else:
            for others in product(range(1, m + 1), repeat=n - 1):
                for seat in range(n):
                    yield others, seat

    def _verify(self, actions: tuple[int, ...], seat: int, truthful: int, deviation: int,
                point: Point) -> SPViolation | None:
        """Recalcula la violación con expected_social_cost sobre el votante aislado."""
        cs = self.candidates
        election = Election(cs, actions)
        voter = seat + 1
        x = LocationProfile((point,))
        truthful_cost = expected_social_cost(self.mechanism(election), x, cs)
        deviation_cost = expected_social_cost(self.mechanism(election.with_action(voter, deviation)), x, cs)
        if deviation_cost >= truthful_cost - Config.TOLERANCE:
            logger.warning(f"Violación descartada al recalcular: {actions}, votante {voter}, {point}")
            return None
        return SPViolation(
            actions=list(actions),
            voter=voter,
            truthful_action=truthful,
            deviation=deviation,
            position=list(point.coords),
            truthful_cost=truthful_cost,
            deviation_cost=deviation_cost,
        )

    # --- Metodos publicos ---
    def run(self, max_n: int, max_evaluations: int) -> SPReport:
        if max_n < 1:
            raise VerificationError(f"Error: max_n={max_n} debe ser >= 1.")
        cs, m, count = self.candidates, self.candidates.m, len(self.points)
        report = SPReport(mechanism=self.mechanism.name, instance=cs.name, max_n=max_n, test_points=count)

        for n in range(1, max_n + 1):
            for others, seat in self._contexts(n):
                if report.evaluations + m * count > max_evaluations:
                    report.truncated = True
                    logger.warning(f"{self.mechanism.name}: presupuesto de {max_evaluations} evaluaciones agotado en n={n}")
                    return report

                costs = np.empty((m, count))
                for a in range(1, m + 1):
                    actions = others[:seat] + (a,) + others[seat:]
                    costs[a - 1] = self._expected_costs(self.mechanism(Election(cs, actions)))
                report.evaluations += m * count

                best = costs.min(axis=0)
                best_action = costs.argmin(axis=0) + 1
                for t in range(1, m + 1):
                    flagged = np.flatnonzero(self.truthful[:, t - 1] & (costs[t - 1] - best > Config.TOLERANCE))
                    for idx in flagged:
                        report.violation_count += 1
                        if len(report.violations) >= MAX_RECORDED_VIOLATIONS:
                            continue
                        actions = others[:seat] + (t,) + others[seat:]
                        violation = self._verify(actions, seat, t, int(best_action[idx]), self.points[idx])
                        if violation is None:
                            report.violation_count -= 1
                        else:
                            report.violations.append(violation)

        if report.violation_count:
            logger.info(f"{self.mechanism.name} en {cs.name}: {report.violation_count} violaciones")
        return report


def check_strategy_proof(mech: Mechanism, cs: CandidateSet, max_n: int | None = None,
                         grid_step: float | None = None, alpha_step: float | None = None,
                         random_points: int | None = None, seed: int | None = None,
                         max_evaluations: int | None = None,
                         points: Sequence[Point] | None = None) -> SPReport:
    """
    Strategy-proofness of ``mech`` on ``cs`` for every election with up to ``max_n``
    voters. The deviating voter is placed on ``points`` when given, otherwise on the
    default test set (candidates, midpoints, line grid, equidistant subspace points and
    seeded random samples). An empty violation list certifies SP over that set.
    """
    if points is None:
        points = build_test_points(cs, grid_step, alpha_step, random_points, seed)
    checker = StrategyProofChecker(mech, cs, points)
    return checker.run(
        Config.SP_MAX_N if max_n is None else max_n,
        int(Config.SP_MAX_EVALUATIONS if max_evaluations is None else max_evaluations),
    )
