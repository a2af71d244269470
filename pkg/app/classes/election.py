import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from app.classes.exceptions import MechanismError, ProfileError
from app.classes.geometry import CandidateSet, Point, PointLike, as_point, distance
from app.config import Config

logger = logging.getLogger(__name__)

Committee = tuple[int, ...]


@dataclass(frozen=True)
class Election:
    """
    The tuple (voters, candidates, actions): actions[i] is the 1-based index of the
    candidate voter i+1 voted for.
    """
    candidates: CandidateSet
    actions: tuple[int, ...]

    def __post_init__(self):
        actions = tuple(int(a) for a in self.actions)
        if not actions:
            raise ProfileError("Error: una elección necesita al menos un votante (n >= 1).")
        bad = [a for a in actions if not 1 <= a <= self.candidates.m]
        if bad:
            raise ProfileError(f"Error: acciones fuera de rango [1, {self.candidates.m}]: {bad}.")
        object.__setattr__(self, "actions", actions)

    @classmethod
    def from_counts(cls, candidates: CandidateSet, counts: Sequence[int]) -> "Election":
        """Crea la elección con los votos ordenados por candidato (representante anónimo)."""
        if len(counts) != candidates.m:
            raise ProfileError(f"Error: se esperaban {candidates.m} recuentos, recibidos {len(counts)}.")
        actions = [k for k, c in enumerate(counts, start=1) for _ in range(int(c))]
        return cls(candidates, tuple(actions))

    @property
    def n(self) -> int:
        return len(self.actions)

    @property
    def m(self) -> int:
        return self.candidates.m

    def tallies(self) -> tuple[int, ...]:
        counts = [0] * self.m
        for a in self.actions:
            counts[a - 1] += 1
        return tuple(counts)

    def with_action(self, voter: int, action: int) -> "Election":
        """Copy of the election where voter (1-based) reports ``action`` instead."""
        if not 1 <= voter <= self.n:
            raise ProfileError(f"Error: votante {voter} fuera de rango [1, {self.n}].")
        actions = list(self.actions)
        actions[voter - 1] = action
        return Election(self.candidates, tuple(actions))


@dataclass(frozen=True)
class LocationProfile:
    positions: tuple[Point, ...]

    def __post_init__(self):
        positions = tuple(as_point(p) for p in self.positions)
        if not positions:
            raise ProfileError("Error: el perfil de ubicaciones está vacío.")
        dims = {p.dimension for p in positions}
        if len(dims) != 1:
            raise ProfileError(f"Error: posiciones con dimensiones distintas {sorted(dims)}.")
        object.__setattr__(self, "positions", positions)

    @classmethod
    def of(cls, positions: Sequence[PointLike]) -> "LocationProfile":
        return cls(tuple(as_point(p) for p in positions))

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def dimension(self) -> int:
        return self.positions[0].dimension

    def __iter__(self) -> Iterator[Point]:
        return iter(self.positions)

    def __getitem__(self, voter: int) -> Point:
        """Posición del votante ``voter`` (1-based)."""
        if not 1 <= voter <= self.n:
            raise IndexError(f"Votante {voter} fuera de rango [1, {self.n}].")
        return self.positions[voter - 1]

    def as_array(self) -> np.ndarray:
        return np.array([p.coords for p in self.positions], dtype=float)

    def appended(self, position: PointLike) -> "LocationProfile":
        return LocationProfile(self.positions + (as_point(position),))


@dataclass(frozen=True)
class CommitteeDistribution:
    """
    Probability mass over committees (tuples of distinct 1-based candidate indices).

    Every committee has the same size, 1 (single-winner mechanisms) or 2 (pairs).
    Keys are normalized to ascending order; entries with probability 0 are kept so
    reports show the whole table.
    """
    probs: Mapping[Committee, float] = field(hash=False)

    def __post_init__(self):
        normalized: dict[Committee, float] = {}
        for committee, p in self.probs.items():
            key = normalize_committee(committee)
            p = float(p)
            if key in normalized:
                raise MechanismError(f"Error: comité {key} repetido en la distribución.")
            if not -Config.DISTINCT_TOLERANCE <= p <= 1.0 + Config.DISTINCT_TOLERANCE:
                raise MechanismError(f"Error: probabilidad {p} fuera de [0, 1] para el comité {key}.")
            normalized[key] = p
        if not normalized:
            raise MechanismError("Error: distribución vacía.")
        sizes = {len(c) for c in normalized}
        if len(sizes) != 1 or not sizes <= {1, 2}:
            raise MechanismError(f"Error: los comités deben tener todos tamaño 1 o 2 (tamaños {sorted(sizes)}).")
        total = sum(normalized.values())
        if abs(total - 1.0) > Config.TOLERANCE:
            raise MechanismError(f"Error: las probabilidades suman {total!r}, no 1.")
        object.__setattr__(self, "probs", dict(sorted(normalized.items())))

    @classmethod
    def point_mass(cls, committee: Sequence[int]) -> "CommitteeDistribution":
        return cls({tuple(committee): 1.0})

    @property
    def size(self) -> int:
        return len(next(iter(self.probs)))

    def probability(self, committee: Sequence[int]) -> float:
        return self.probs.get(normalize_committee(committee), 0.0)

    def support(self) -> list[Committee]:
        return [c for c, p in self.probs.items() if p > 0.0]

    def items(self):
        return self.probs.items()

    def is_deterministic(self) -> bool:
        return len(self.support()) == 1

    def as_dict(self) -> dict[str, float]:
        """Claves "k,l" para serializar a JSON."""
        return {",".join(str(k) for k in c): p for c, p in self.probs.items()}


@dataclass(frozen=True)
class PairDistribution(CommitteeDistribution):
    """Distribution over unordered candidate pairs (k, l), k < l."""

    def __post_init__(self):
        super().__post_init__()
        if self.size != 2:
            raise MechanismError("Error: una PairDistribution solo admite pares de candidatos.")


def normalize_committee(committee: Sequence[int]) -> Committee:
    key = tuple(sorted(int(k) for k in committee))
    if len(set(key)) != len(key):
        raise ProfileError(f"Error: comité {tuple(committee)} con candidatos repetidos.")
    return key


def _check_index(k: int, cs: CandidateSet) -> None:
    if not 1 <= k <= cs.m:
        raise ProfileError(f"Error: candidato {k} fuera de rango [1, {cs.m}].")


def _check_profile(x: LocationProfile, cs: CandidateSet) -> None:
    if x.dimension != cs.dimension:
        raise ProfileError(f"Error: posiciones de dimensión {x.dimension}, candidatos de dimensión {cs.dimension}.")


# --- Consistencia ---
def nearest_candidates(x: Point, cs: CandidateSet) -> frozenset[int]:
    """
    Indices of the candidates closest to ``x``, every index within Config.TOLERANCE
    of the minimum distance included.
    """
    dists = cs.distances_from([x])[0]
    best = dists.min()
    return frozenset(int(k) + 1 for k in np.flatnonzero(dists <= best + Config.TOLERANCE))


def truthful_actions(x: Point, cs: CandidateSet) -> tuple[int, ...]:
    return tuple(sorted(nearest_candidates(x, cs)))


def truthful_election(x: LocationProfile, cs: CandidateSet) -> Election:
    """Each voter votes its lexicographically smallest nearest candidate."""
    _check_profile(x, cs)
    actions = []
    for voter, position in enumerate(x, start=1):
        nearest = truthful_actions(position, cs)
        if len(nearest) > 1:
            logger.warning(f"Votante {voter} empatado entre {nearest}; se elige {nearest[0]}.")
        actions.append(nearest[0])
    return Election(cs, tuple(actions))


def is_consistent(x: LocationProfile, e: Election) -> bool:
    if x.n != e.n:
        raise ProfileError(f"Error: {x.n} posiciones para {e.n} votantes.")
    _check_profile(x, e.candidates)
    return all(a in nearest_candidates(p, e.candidates) for p, a in zip(x, e.actions))


# --- Costes ---
def pair_cost(pair: Sequence[int], x: Point, cs: CandidateSet) -> float:
    k, l = pair
    if k == l:
        raise ProfileError(f"Error: par ({k}, {l}) con el mismo candidato.")
    _check_index(k, cs)
    _check_index(l, cs)
    return min(distance(x, cs[k]), distance(x, cs[l]))


def committee_cost(committee: Sequence[int], x: Point, cs: CandidateSet) -> float:
    """Distance from ``x`` to the nearest member of a committee of size 1 or 2."""
    if len(committee) == 2:
        return pair_cost(committee, x, cs)
    if len(committee) != 1:
        raise ProfileError(f"Error: comité de tamaño {len(committee)} no soportado.")
    _check_index(committee[0], cs)
    return distance(x, cs[committee[0]])


def social_cost(pair: Sequence[int], x: LocationProfile, cs: CandidateSet) -> float:
    _check_profile(x, cs)
    return sum(committee_cost(pair, position, cs) for position in x)


def opt(x: LocationProfile, cs: CandidateSet, committee_size: int = 2) -> tuple[Committee, float]:
    """
    Optimal committee by exhaustive enumeration in lexicographic order (pairs by default,
    single candidates with ``committee_size=1``). Only a strictly smaller cost replaces
    the incumbent, so ties keep the smallest committee.
    """
    if committee_size not in (1, 2):
        raise ProfileError(f"Error: tamaño de comité {committee_size} no soportado.")
    committees = cs.pairs() if committee_size == 2 else [(k,) for k in cs.indices()]
    best_pair, best_cost = None, math.inf
    for pair in committees:
        cost = social_cost(pair, x, cs)
        if cost < best_cost:
            best_pair, best_cost = pair, cost
    return best_pair, best_cost


def expected_social_cost(d: CommitteeDistribution, x: LocationProfile, cs: CandidateSet) -> float:
    return sum(p * social_cost(committee, x, cs) for committee, p in d.items() if p > 0.0)


def ratio(mechanism_cost: float, opt_cost: float) -> float:
    """E[SC]/OPT with the zero-OPT convention: 1 when both vanish, infinity otherwise."""
    if mechanism_cost < 0 or opt_cost < 0:
        raise ProfileError(f"Error: costes negativos ({mechanism_cost}, {opt_cost}).")
    eps = Config.DISTINCT_TOLERANCE
    if opt_cost > eps:
        return mechanism_cost / opt_cost
    if mechanism_cost <= eps:
        return 1.0
    return math.inf


def evaluate(d: CommitteeDistribution, x: LocationProfile, e: Election) -> dict[str, Any]:
    """
    Evaluates an outcome on a location profile: expected cost, OPT and their ratio.
    """
    cs = e.candidates
    mechanism_cost = expected_social_cost(d, x, cs)
    opt_pair, opt_cost = opt(x, cs, committee_size=d.size)
    return {
        "expected_social_cost": mechanism_cost,
        "opt_pair": opt_pair,
        "opt": opt_cost,
        "ratio": ratio(mechanism_cost, opt_cost),
    }
