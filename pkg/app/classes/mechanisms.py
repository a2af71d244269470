import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb
from typing import Callable, Sequence

from app.classes.election import CommitteeDistribution, Election, PairDistribution
from app.classes.exceptions import MechanismError
from app.config import Config

logger = logging.getLogger(__name__)

# q(i, j, n_i, n_j, n, m) -> probabilidad del par (i, j)
PairRule = Callable[[int, int, int, int, int, int], float]
# q(k, n_k, n, m) -> probabilidad del candidato k
SingleRule = Callable[[int, int, int, int], float]


@dataclass(frozen=True)
class VoteCounts:
    """counts[k-1] = n_k, the number of votes for candidate k."""
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise MechanismError(f"Error: recuentos negativos {counts}.")
        if sum(counts) < 1:
            raise MechanismError("Error: se necesita al menos un voto (n >= 1).")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def m(self) -> int:
        return len(self.counts)

    def __getitem__(self, k: int) -> int:
        return self.counts[k - 1]

    def supported(self) -> list[int]:
        return [k for k, c in enumerate(self.counts, start=1) if c > 0]

    def all_same(self) -> int | None:
        """El candidato que recibe todos los votos, o None si hay al menos dos con votos."""
        supported = self.supported()
        return supported[0] if len(supported) == 1 else None


def counts_of(e: Election) -> VoteCounts:
    return VoteCounts(e.tallies())


class Mechanism(ABC):
    """
    An scv mechanism: maps an Election (never voter positions) to a distribution
    over committees. Deterministic mechanisms return a point mass.
    """
    name: str = "mechanism"
    anonymous: bool = True
    committee_size: int = 2

    @abstractmethod
    def outcome(self, e: Election) -> CommitteeDistribution:
        ...

    def __call__(self, e: Election) -> CommitteeDistribution:
        return self.outcome(e)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


# --- Mecanismos deterministas ---
def two_extremes(e: Election) -> tuple[int, int]:
    """
    Leftmost and rightmost voted candidates on the line. If every vote goes to y_i,
    returns (1, i), or (1, 2) when i = 1.
    """
    if e.candidates.dimension != 1:
        raise MechanismError(f"Error: Two-Extremes solo admite instancias 1-D (dimensión {e.candidates.dimension}).")
    voted = sorted(set(e.actions))
    if len(voted) == 1:
        i = voted[0]
        return (1, i) if i != 1 else (1, 2)
    return voted[0], voted[-1]


def sequential_dictator(e: Election) -> tuple[int, int]:
    """First two different candidates in the action sequence, (a_1, a_j)."""
    first = e.actions[0]
    for a in e.actions[1:]:
        if a != first:
            return first, a
    # Todos votan al mismo candidato
    return (1, first) if first != 1 else (1, 2)


class TwoExtremes(Mechanism):
    name = "two-extremes"

    def outcome(self, e: Election) -> PairDistribution:
        return PairDistribution.point_mass(two_extremes(e))


class SequentialDictator(Mechanism):
    name = "sequential-dictator"
    anonymous = False

    def outcome(self, e: Election) -> PairDistribution:
        return PairDistribution.point_mass(sequential_dictator(e))


# --- Mecanismos independientes ---
def pair_independent_q(i: int, j: int, n_i: int, n_j: int, n: int, m: int) -> float:
    return n_i / (n - n_j) + n_j / (n - n_i) - (n_i + n_j) / n


def pair_independent_all_same(i: int, j: int, n_i: int, n_j: int, n: int, m: int) -> float:
    return 1.0 / (m - 1) if n in (n_i, n_j) else 0.0


def uniform_q(i: int, j: int, n_i: int, n_j: int, n: int, m: int) -> float:
    return 1.0 / comb(m, 2)


class IndependentMechanism(Mechanism):
    """
    Two-winner mechanism whose pair probabilities depend only on the two vote counts
    of the pair: p_{i,j}(a) = q(i, j, n_i, n_j). Profiles where every vote goes to a
    single candidate use the separate ``all_same`` rule.
    """
    def __init__(self, name: str, q: PairRule, all_same: PairRule):
        self.name = name
        self.q = q
        self.all_same = all_same

    # --- Metodos publicos ---
    def probability(self, i: int, j: int, n_i: int, n_j: int, n: int, m: int, all_same: bool = False) -> float:
        rule = self.all_same if all_same else self.q
        return float(rule(i, j, n_i, n_j, n, m))

    def distribution(self, counts: VoteCounts) -> PairDistribution:
        n, m = counts.n, counts.m
        all_same = counts.all_same() is not None
        probs = {}
        for i in range(1, m + 1):
            for j in range(i + 1, m + 1):
                probs[(i, j)] = self.probability(i, j, counts[i], counts[j], n, m, all_same=all_same)
        return PairDistribution(probs)

    def outcome(self, e: Election) -> PairDistribution:
        return self.distribution(counts_of(e))


class PairIndependent(IndependentMechanism):
    def __init__(self):
        super().__init__("pair-independent", pair_independent_q, pair_independent_all_same)


class UniformPairs(IndependentMechanism):
    def __init__(self):
        super().__init__("uniform-pairs", uniform_q, uniform_q)


class MixedIndependent(IndependentMechanism):
    """lam * Pair-Independent + (1 - lam) * UniformPairs, pair by pair."""
    def __init__(self, lam: float = 0.5):
        if not 0.0 <= lam <= 1.0:
            raise MechanismError(f"Error: lam={lam} fuera de [0, 1].")
        self.lam = lam

        def mix(rule: PairRule) -> PairRule:
            return lambda i, j, a, b, n, m: lam * rule(i, j, a, b, n, m) + (1 - lam) * uniform_q(i, j, a, b, n, m)

        super().__init__(f"mixed-independent(lam={lam:g})", mix(pair_independent_q), mix(pair_independent_all_same))


class ComplementPairIndependent(IndependentMechanism):
    """
    q' = (1 - q_PI) / (C(m,2) - 1). Still a distribution, but it moves mass away
    from a pair exactly when Pair-Independent moves mass toward it, so it is not
    monotone and not strategy-proof.
    """
    def __init__(self):
        def complement(rule: PairRule) -> PairRule:
            return lambda i, j, a, b, n, m: (1.0 - rule(i, j, a, b, n, m)) / (comb(m, 2) - 1)

        super().__init__("complement-pair-independent", complement(pair_independent_q), complement(pair_independent_all_same))

    def outcome(self, e: Election) -> PairDistribution:
        if e.m < 3:
            raise MechanismError("Error: el mecanismo complementario necesita m >= 3.")
        return super().outcome(e)


def pair_independent(e: Election) -> PairDistribution:
    return PairIndependent().outcome(e)


# --- Mecanismos de un ganador ---
class SingleWinnerIndependent(Mechanism):
    """Single-winner mechanism with p_k(a) = q(k, n_k, n, m)."""
    committee_size = 1

    def __init__(self, name: str, q: SingleRule):
        self.name = name
        self.q = q

    def probability(self, k: int, n_k: int, n: int, m: int) -> float:
        return float(self.q(k, n_k, n, m))

    def outcome(self, e: Election) -> CommitteeDistribution:
        counts = counts_of(e)
        return CommitteeDistribution({(k,): self.probability(k, counts[k], counts.n, counts.m) for k in range(1, counts.m + 1)})


class RandomDictator(SingleWinnerIndependent):
    def __init__(self):
        super().__init__("random-dictator", lambda k, n_k, n, m: n_k / n)

    def exact_probabilities(self, e: Election) -> dict[int, Fraction]:
        counts = counts_of(e)
        return {k: Fraction(counts[k], counts.n) for k in range(1, counts.m + 1)}


def random_dictator(e: Election) -> CommitteeDistribution:
    return RandomDictator().outcome(e)


def affine_single_winner(intercepts: Sequence[float], name: str = "affine") -> SingleWinnerIndependent:
    """
    q_k(n_k) = c * n_k + b_k with c = (1 - sum(b)) / n, so probabilities sum to 1.
    ``intercepts`` gives b_1..b_m; zero intercepts recover Random Dictator.
    """
    b = tuple(float(v) for v in intercepts)

    def q(k: int, n_k: int, n: int, m: int) -> float:
        if m != len(b):
            raise MechanismError(f"Error: {len(b)} interceptos para m={m}.")
        return (1.0 - sum(b)) / n * n_k + b[k - 1]

    return SingleWinnerIndependent(name, q)


# --- Monotonía ---
def _realizable_values(mech: IndependentMechanism, i: int, j: int, a: int, b: int, n: int, m: int) -> list[float]:
    """
    Valores de q_{i,j} alcanzables con n_i = a, n_j = b. El resto de votos (n - a - b) va a
    otros candidatos; con a = b = 0 puede ir a uno solo (rama "todos igual") o repartirse.
    """
    rest = n - a - b
    if rest == 0:
        return [mech.probability(i, j, a, b, n, m, all_same=(a == n or b == n))]
    if a > 0 or b > 0:
        return [mech.probability(i, j, a, b, n, m)]
    values = [mech.probability(i, j, 0, 0, n, m, all_same=True)]
    if m >= 4 and rest >= 2:
        values.append(mech.probability(i, j, 0, 0, n, m))
    return values


def is_monotone(mech: IndependentMechanism, n: int, m: int) -> bool:
    """
    Exhaustive monotonicity check: for every pair (i, j) and feasible (n_i, n_j) with
    n_i + n_j <= n - 1, adding one vote to either member never lowers q_{i,j}
    (tolerance 1e-12), including steps into the all-same branch.
    """
    if not 1 <= n <= Config.MONOTONE_MAX_N or not 2 <= m <= Config.MONOTONE_MAX_M:
        raise MechanismError(
            f"Error: tamaño no enumerable (n={n}, m={m}); límites n <= {Config.MONOTONE_MAX_N}, m <= {Config.MONOTONE_MAX_M}."
        )
    eps = Config.DISTINCT_TOLERANCE
    if m == 2:
        # Con dos candidatos todos los votos caen en el par: no hay pasos factibles
        return True
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            for a, b in product(range(n), repeat=2):
                if a + b > n - 1:
                    continue
                current = max(_realizable_values(mech, i, j, a, b, n, m))
                for step in ((a + 1, b), (a, b + 1)):
                    following = min(_realizable_values(mech, i, j, *step, n, m))
                    if following < current - eps:
                        logger.info(f"{mech.name}: q_{{{i},{j}}}{step} = {following} < q_{{{i},{j}}}({a},{b}) = {current}")
                        return False
    return True


# --- Registro ---
MECHANISMS: dict[str, Callable[..., Mechanism]] = {
    "two-extremes": TwoExtremes,
    "pair-independent": PairIndependent,
    "random-dictator": RandomDictator,
    "sequential-dictator": SequentialDictator,
    "uniform-pairs": UniformPairs,
    "mixed-independent": MixedIndependent,
    "complement-pair-independent": ComplementPairIndependent,
}


def get_mechanism(mechanism_id: str, **params) -> Mechanism:
    factory = MECHANISMS.get(mechanism_id)
    if factory is None:
        raise MechanismError(f"Error: mecanismo '{mechanism_id}' desconocido. Disponibles: {', '.join(MECHANISMS)}.")
    return factory(**params)


def list_mechanisms() -> list[str]:
    return list(MECHANISMS)
