import logging
import math
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, product
from typing import Iterator, Sequence

import numpy as np

from app.classes.election import Committee, Election, LocationProfile, evaluate, is_consistent
from app.classes.exceptions import VerificationError
from app.classes.geometry import CandidateSet, Point
from app.classes.mechanisms import Mechanism
from app.classes.reports import DistortionReport
from app.config import Config
from app.services.test_points import structural_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Placement:
    """A voter position paired with one of its truthful actions."""
    point: Point
    action: int


def build_placements(cs: CandidateSet, points: Sequence[Point]) -> list[Placement]:
    # Cada empate genera una colocación por rama
    distances = cs.distances_from(list(points))
    placements = []
    for point, row in zip(points, distances):
        for k in np.flatnonzero(row <= row.min() + Config.TOLERANCE):
            placements.append(Placement(point, int(k) + 1))
    return placements


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Every way to write ``total`` as an ordered sum of ``parts`` non-negative integers."""
    for bars in combinations(range(total + parts - 1), parts - 1):
        counts, previous = [], -1
        for b in bars:
            counts.append(b - previous - 1)
            previous = b
        counts.append(total + parts - 2 - previous)
        yield tuple(counts)


def ratios(weights: np.ndarray, sums: np.ndarray) -> np.ndarray:
    """
    E[SC]/OPT for a batch of profiles. ``sums`` is K x B (social cost of each committee
    for each profile), ``weights`` the K committee probabilities.
    """
    cost = weights @ sums
    best = sums.min(axis=0)
    eps = Config.DISTINCT_TOLERANCE
    safe = np.where(best > eps, best, 1.0)
    return np.where(best > eps, cost / safe, np.where(cost <= eps, 1.0, np.inf))


class DistortionSearch:
    """
    Adversarial search for the worst ratio E[SC]/OPT of a mechanism with n voters.

    Voters are placed on structural placements (candidates, midpoints, line grid,
    equidistant subspace points, every tie branch). When the profile space fits in
    ``exhaustive_limit`` it is enumerated; otherwise each action pattern is explored by
    coordinate ascent over the placements of every group of voters. Seeded random
    profiles are added in both cases. The result is always a lower bound.
    """
    def __init__(self, mechanism: Mechanism, candidates: CandidateSet, n: int, placements: Sequence[Placement],
                 random_profiles: int, seed: int, exhaustive_limit: int, max_rounds: int):
        if n < 2:
            raise VerificationError(f"Error: la búsqueda de distorsión requiere n >= 2 (recibido {n}).")
        if not placements:
            raise VerificationError("Error: no hay colocaciones para la búsqueda.")
        self.mechanism = mechanism
        self.candidates = candidates
        self.n = n
        self.placements = list(placements)
        self.random_profiles = random_profiles
        self.seed = seed
        self.exhaustive_limit = exhaustive_limit
        self.max_rounds = max_rounds

        cs = candidates
        self.committees: list[Committee] = (
            cs.pairs() if mechanism.committee_size == 2 else [(k,) for k in cs.indices()]
        )
        distances = cs.distances_from([p.point for p in self.placements])
        # costs[c, j]: coste del comité c para un votante en la colocación j
        self.costs = np.array([distances[:, [k - 1 for k in c]].min(axis=1) for c in self.committees])
        self.actions = np.array([p.action for p in self.placements])
        self.by_action = {a: np.flatnonzero(self.actions == a) for a in cs.indices()}
        self.home = {}
        for j, p in enumerate(self.placements):
            if p.point == cs[p.action]:
                self.home.setdefault(p.action, j)

        self._weights: dict[tuple[int, ...], np.ndarray] = {}
        self.evaluations = 0
        self.best_ratio = -math.inf
        self.best_positions: tuple[Point, ...] = ()
        self.best_actions: tuple[int, ...] = ()

    # --- Metodos privados ---
    def _outcome_weights(self, actions: tuple[int, ...]) -> np.ndarray:
        key = tuple(sorted(actions)) if self.mechanism.anonymous else actions
        weights = self._weights.get(key)
        if weights is None:
            d = self.mechanism(Election(self.candidates, actions))
            weights = np.array([d.probability(c) for c in self.committees])
            self._weights[key] = weights
        return weights

    def _consider(self, value: float, positions: Sequence[Point], actions: Sequence[int]) -> None:
        self.evaluations += 1
        # Solo una mejora estricta sustituye al testigo: el primero encontrado gana
        if value > self.best_ratio:
            self.best_ratio = float(value)
            self.best_positions = tuple(positions)
            self.best_actions = tuple(int(a) for a in actions)

    def _consider_indices(self, value: float, indices: Sequence[int]) -> None:
        if value > self.best_ratio:
            self._consider(value, [self.placements[j].point for j in indices], [self.placements[j].action for j in indices])
        else:
            self.evaluations += 1

    def _exhaustive_size(self) -> int:
        size = len(self.placements)
        return math.comb(size + self.n - 1, self.n) if self.mechanism.anonymous else size ** self.n

    def _exhaustive(self) -> None:
        size = len(self.placements)
        profiles = (
            combinations_with_replacement(range(size), self.n) if self.mechanism.anonymous
            else product(range(size), repeat=self.n)
        )
        for indices in profiles:
            indices = list(indices)
            weights = self._outcome_weights(tuple(int(a) for a in self.actions[indices]))
            sums = self.costs[:, indices].sum(axis=1)
            self._consider_indices(ratios(weights, sums[:, None])[0], indices)

    def _patterns(self) -> Iterator[list[tuple[int, int]]]:
        """Grupos (acción, número de votantes) en orden de votante."""
        m = self.candidates.m
        if self.mechanism.anonymous:
            for counts in compositions(self.n, m):
                yield [(a, c) for a, c in enumerate(counts, start=1) if c > 0]
        else:
            # Los dos primeros votantes por separado; el resto agrupado por acción
            for a1, a2 in product(range(1, m + 1), repeat=2):
                for counts in compositions(self.n - 2, m):
                    yield [(a1, 1), (a2, 1)] + [(a, c) for a, c in enumerate(counts, start=1) if c > 0]

    def _ascent(self, groups: list[tuple[int, int]]) -> None:
        actions = tuple(a for a, c in groups for _ in range(c))
        weights = self._outcome_weights(actions)
        choice = [self.home[a] for a, _ in groups]
        sums = sum(c * self.costs[:, j] for (_, c), j in zip(groups, choice))
        current = ratios(weights, sums[:, None])[0]

        for _ in range(self.max_rounds):
            improved = False
            for g, (a, c) in enumerate(groups):
                options = self.by_action[a]
                batch = (sums - c * self.costs[:, choice[g]])[:, None] + c * self.costs[:, options]
                values = ratios(weights, batch)
                self.evaluations += len(options)
                k = int(np.argmax(values))
                if values[k] > current + Config.TOLERANCE:
                    choice[g] = int(options[k])
                    sums = batch[:, k]
                    current = values[k]
                    improved = True
            if not improved:
                break

        indices = [j for (_, c), j in zip(groups, choice) for _ in range(c)]
        self._consider_indices(current, indices)

    def _random(self) -> None:
        cs = self.candidates
        rng = np.random.default_rng(self.seed)
        low, high = cs.bounding_box()
        margin = 0.25 * np.maximum(high - low, cs.d_min)
        for _ in range(self.random_profiles):
            positions = rng.uniform(low - margin, high + margin, size=(self.n, cs.dimension))
            distances = cs.distances_from(positions)
            # argmin devuelve el primer mínimo: desempate lexicográfico
            actions = tuple(int(a) + 1 for a in distances.argmin(axis=1))
            sums = np.array([distances[:, [k - 1 for k in c]].min(axis=1).sum() for c in self.committees])
            value = ratios(self._outcome_weights(actions), sums[:, None])[0]
            self._consider(value, [Point(tuple(float(v) for v in row)) for row in positions], actions)

    # --- Metodos publicos ---
    def run(self) -> DistortionReport:
        size = self._exhaustive_size()
        exhaustive = size <= self.exhaustive_limit
        if exhaustive:
            self._exhaustive()
        else:
            logger.info(f"{self.mechanism.name}: {size} perfiles, se usa búsqueda por grupos")
            for groups in self._patterns():
                self._ascent(groups)
        self._random()
        return self._report(exhaustive)

    def _report(self, exhaustive: bool) -> DistortionReport:
        cs = self.candidates
        x = LocationProfile(self.best_positions)
        e = Election(cs, self.best_actions)
        if not is_consistent(x, e):
            raise VerificationError("Error: el testigo de la búsqueda no es consistente.")
        # El ratio publicado es el recalculado por el camino lento
        result = evaluate(self.mechanism(e), x, e)
        fast, slow = self.best_ratio, result["ratio"]
        if not (math.isinf(fast) and math.isinf(slow)) and abs(fast - slow) > Config.TOLERANCE * max(1.0, abs(slow)):
            logger.warning(f"{self.mechanism.name}: ratio rápido {fast} y recalculado {slow} difieren")
        return DistortionReport(
            mechanism=self.mechanism.name,
            instance=cs.name,
            n=self.n,
            best_ratio=slow,
            witness_positions=[list(p.coords) for p in x],
            witness_actions=list(e.actions),
            witness_opt_pair=result["opt_pair"],
            witness_expected_cost=result["expected_social_cost"],
            witness_opt=result["opt"],
            search_budget=self.evaluations,
            exhaustive=exhaustive,
            seed=self.seed,
        )


def distortion_search(mech: Mechanism, cs: CandidateSet, n: int, grid_step: float | None = None,
                      alpha_step: float | None = None, random_profiles: int | None = None,
                      seed: int | None = None, exhaustive_limit: int | None = None,
                      max_rounds: int | None = None) -> DistortionReport:
    """Best E[SC]/OPT found for ``mech`` on ``cs`` with ``n`` voters, with its witness."""
    points = structural_points(cs, grid_step or Config.SEARCH_GRID_STEP, alpha_step or Config.SEARCH_ALPHA_STEP)
    search = DistortionSearch(
        mech, cs, n, build_placements(cs, points),
        random_profiles=Config.SEARCH_RANDOM_PROFILES if random_profiles is None else random_profiles,
        seed=Config.SEED if seed is None else seed,
        exhaustive_limit=Config.SEARCH_EXHAUSTIVE_LIMIT if exhaustive_limit is None else exhaustive_limit,
        max_rounds=Config.SEARCH_MAX_ROUNDS if max_rounds is None else max_rounds,
    )
    return search.run()
