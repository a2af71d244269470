import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import z3

from app.classes.election import LocationProfile, social_cost
from app.classes.reports import BranchCertificate, UnsatCertificate
from app.config import Config
from app.services.distortion import compositions
from app.services.instances import MULTI_DETER_ACTIONS, instance_multi4

logger = logging.getLogger(__name__)

VOTERS = 4
PAIRS: list[tuple[int, int]] = list(combinations(range(1, 5), 2))
# Perfil con un voto por candidato: sobre él se ramifica
ONE_EACH = (1, 1, 1, 1)


def var_name(pair: tuple[int, int], counts: tuple[int, ...]) -> str:
    """q12(3,1): probability of (y_1, y_2) when they receive 3 and 1 votes."""
    i, j = pair
    return f"q{i}{j}({counts[i - 1]},{counts[j - 1]})"


def relabel(pair: tuple[int, int]) -> dict[int, int]:
    """
    Candidate relabelling that sends the branch pair at x^2 to the canonical one:
    (y_1, y_2) when y_4 is not elected, (y_1, y_4) when it is. y_4 is always fixed.
    """
    i, j = pair
    if j == 4:
        rest = [k for k in (1, 2, 3) if k != i]
        return {1: i, 2: rest[0], 3: rest[1], 4: 4}
    rest = [k for k in (1, 2, 3) if k not in pair]
    return {1: i, 2: j, 3: rest[0], 4: 4}


def proof_profiles(pair: tuple[int, int]) -> dict[str, tuple[int, ...]]:
    """Vote counts of the profiles x^1..x^8 after relabelling them for the branch."""
    mapping = relabel(pair)
    profiles = {}
    for label, actions in MULTI_DETER_ACTIONS.items():
        moved = [mapping[a] for a in actions]
        profiles[label] = tuple(moved.count(k) for k in range(1, 5))
    return profiles


@dataclass(frozen=True)
class SumConstraint:
    """The listed 0/1 variables sum to exactly 1."""
    variables: tuple[str, ...]
    counts: tuple[int, ...]
    kind: str
    label: str = ""

    def __str__(self) -> str:
        return f"{' + '.join(self.variables)} = 1"

    def describe(self) -> str:
        profile = f" {self.label}" if self.label else ""
        return f"{self.kind}{profile} {self.counts}: {self}"


class DeterministicImpossibility:
    """
    Anonymous deterministic mechanisms with four voters on the 4-candidate instance,
    written as 0/1 pair probabilities q_{i,j}(n_i, n_j).

    Constraints: every zero-OPT profile (voters on at most two candidates) must elect
    its zero-cost pair, and the pair probabilities of every vote count vector sum to 1.
    The checker branches on the pair elected when each candidate gets one vote. Each
    branch is first closed with the profiles x^1..x^8 only (relabelled for the branch),
    through propagation and a parity contradiction; the full system over every count
    vector is the fallback. z3 then cross-checks the whole system over the integers
    and over the reals.
    """
    def __init__(self, r: float):
        self.r = r
        self.candidates = instance_multi4(r)
        self.count_vectors = [c for c in compositions(VOTERS, 4) if sum(1 for v in c if v) >= 2]
        self.constraints = self._build_constraints()
        self.variables = sorted({v for con in self.constraints for v in con.variables})
        self.nodes = 0

    # --- Metodos privados ---
    def _zero_pairs(self, counts: tuple[int, ...]) -> list[tuple[int, int]]:
        # Votantes sobre sus candidatos: el OPT nulo obliga a elegir el par de coste 0
        cs = self.candidates
        x = LocationProfile(tuple(cs[k] for k, c in enumerate(counts, start=1) for _ in range(c)))
        return [p for p in PAIRS if social_cost(p, x, cs) <= Config.DISTINCT_TOLERANCE]

    def _build_constraints(self) -> list[SumConstraint]:
        constraints = []
        for counts in self.count_vectors:
            zero = self._zero_pairs(counts)
            if zero:
                constraints.append(SumConstraint(tuple(var_name(p, counts) for p in zero), counts, "forcing"))
            constraints.append(SumConstraint(tuple(var_name(p, counts) for p in PAIRS), counts, "normalization"))
        return constraints

    def _proof_constraints(self, pair: tuple[int, int]) -> list[SumConstraint]:
        """Forcing from the zero-OPT profiles plus normalization at the relabelled x^1..x^8."""
        constraints = [con for con in self.constraints if con.kind == "forcing"]
        forced = {con.counts for con in constraints}
        constraints += [con for con in self.constraints if con.kind == "normalization" and con.counts in forced]
        seen = set(forced)
        for label, counts in proof_profiles(pair).items():
            if counts in seen:
                continue
            seen.add(counts)
            constraints.append(SumConstraint(tuple(var_name(p, counts) for p in PAIRS), counts, "normalization", label))
        return constraints

    @staticmethod
    def _propagate(constraints: list[SumConstraint], assignment: dict[str, int]) -> tuple[dict[str, int], str | None]:
        """Exactly-one propagation; returns the extended assignment and the conflict, if any."""
        values = dict(assignment)
        changed = True
        while changed:
            changed = False
            for con in constraints:
                ones = [v for v in con.variables if values.get(v) == 1]
                unknown = [v for v in con.variables if v not in values]
                if len(ones) > 1:
                    return values, f"{con.describe()} con {len(ones)} variables a 1"
                if ones and unknown:
                    for v in unknown:
                        values[v] = 0
                    changed = True
                elif not ones and not unknown:
                    return values, f"{con.describe()} con todas las variables a 0"
                elif not ones and len(unknown) == 1:
                    values[unknown[0]] = 1
                    changed = True
        return values, None

    def _satisfiable(self, constraints: list[SumConstraint], assignment: dict[str, int]) -> bool:
        self.nodes += 1
        values, conflict = self._propagate(constraints, assignment)
        if conflict:
            return False
        free = sorted({v for con in constraints for v in con.variables if v not in values})
        if not free:
            return True
        return any(self._satisfiable(constraints, {**values, free[0]: bit}) for bit in (1, 0))

    @staticmethod
    def _residual_edges(constraints: list[SumConstraint], values: dict[str, int]) -> dict[str, dict[str, SumConstraint]]:
        """Constraints reduced to u + v = 1 after propagation, as an adjacency map."""
        adjacency: dict[str, dict[str, SumConstraint]] = {}
        for con in constraints:
            if any(values.get(v) == 1 for v in con.variables):
                continue
            unknown = [v for v in con.variables if v not in values]
            if len(unknown) == 2:
                u, v = unknown
                adjacency.setdefault(u, {}).setdefault(v, con)
                adjacency.setdefault(v, {}).setdefault(u, con)
        return adjacency

    @staticmethod
    def _odd_cycle(adjacency: dict[str, dict[str, SumConstraint]]) -> list[str] | None:
        # Primero triángulos, en orden lexicográfico
        for u in sorted(adjacency):
            neighbours = sorted(w for w in adjacency[u] if w > u)
            for v, w in combinations(neighbours, 2):
                if w in adjacency[v]:
                    return [u, v, w]

        # Si no hay triángulos, 2-coloreado BFS
        color: dict[str, int] = {}
        parent: dict[str, str | None] = {}
        for start in sorted(adjacency):
            if start in color:
                continue
            color[start], parent[start] = 0, None
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for v in sorted(adjacency[u]):
                    if v not in color:
                        color[v], parent[v] = 1 - color[u], u
                        queue.append(v)
                    elif color[v] == color[u]:
                        path_u, path_v = [u], [v]
                        while parent[path_u[-1]] is not None:
                            path_u.append(parent[path_u[-1]])
                        while parent[path_v[-1]] is not None:
                            path_v.append(parent[path_v[-1]])
                        while len(path_u) > 1 and len(path_v) > 1 and path_u[-2] == path_v[-2]:
                            path_u.pop()
                            path_v.pop()
                        return path_u + list(reversed(path_v[:-1]))
        return None

    def _derive(self, constraints: list[SumConstraint], fixed: dict[str, int]) -> tuple[bool, str, list[str], str | None]:
        """(closed, reason, equations, parity) of one branch under the given constraints."""
        values, conflict = self._propagate(constraints, fixed)
        if conflict:
            return True, f"propagación: {conflict}", [], None

        adjacency = self._residual_edges(constraints, values)
        cycle = self._odd_cycle(adjacency)
        closed = not self._satisfiable(constraints, values)
        if cycle is None:
            return closed, "enumeración exhaustiva" if closed else "rama satisfacible", [], None

        equations = []
        for u, v in zip(cycle, cycle[1:] + cycle[:1]):
            con = adjacency[u][v]
            profile = f" {con.label}" if con.label else ""
            equations.append(f"{con.kind}{profile} {con.counts}: {' + '.join(sorted((u, v)))} = 1")
        # Sumar las ecuaciones del ciclo: cada variable aparece dos veces
        parity = f"2({' + '.join(sorted(cycle))}) = {len(cycle)}"
        return closed, f"paridad: {parity}, imposible con valores 0/1", equations, parity

    def _close_branch(self, pair: tuple[int, int]) -> tuple[BranchCertificate, str | None]:
        case = "case-2" if 4 in pair else "case-1"
        name = f"{case}:{pair}"
        fixed = {var_name(p, ONE_EACH): int(p == pair) for p in PAIRS}
        closed, reason, equations, parity = self._derive(self._proof_constraints(pair), fixed)
        if not closed:
            logger.warning(f"{name}: los perfiles x^1..x^8 no cierran la rama; se usa el sistema completo")
            closed, reason, equations, parity = self._derive(self.constraints, fixed)
        certificate = BranchCertificate(name=name, x2_pair=pair, closed=closed, reason=reason, equations=equations)
        return certificate, parity

    def _z3_check(self, integer: bool) -> tuple[str, dict[str, float]]:
        make = z3.Int if integer else z3.Real
        # Nombres sin paréntesis para z3
        symbols = {name: make(name.replace("(", "_").replace(",", "_").rstrip(")")) for name in self.variables}
        solver = z3.Solver()
        for symbol in symbols.values():
            solver.add(symbol >= 0, symbol <= 1)
        for con in self.constraints:
            solver.add(sum(symbols[v] for v in con.variables) == 1)
        result = solver.check()
        witness: dict[str, float] = {}
        if result == z3.sat:
            model = solver.model()
            for name, symbol in symbols.items():
                value = model.eval(symbol, model_completion=True)
                witness[name] = float(value.as_long()) if integer else float(value.as_fraction())
        return str(result), witness

    def _pair_independent_solution(self) -> bool:
        """Pair-Independent, in exact arithmetic, satisfies every constraint of the relaxation."""
        values = {}
        for counts in self.count_vectors:
            for i, j in PAIRS:
                a, b = counts[i - 1], counts[j - 1]
                values[var_name((i, j), counts)] = Fraction(a, VOTERS - b) + Fraction(b, VOTERS - a) - Fraction(a + b, VOTERS)
        return all(sum(values[v] for v in con.variables) == 1 for con in self.constraints) \
            and all(0 <= value <= 1 for value in values.values())

    # --- Metodos publicos ---
    def certify(self) -> UnsatCertificate:
        derivation = [
            f"{len(self.count_vectors)} vectores de votos con al menos dos candidatos votados",
            f"{len(self.variables)} variables 0/1, {len(self.constraints)} restricciones de suma 1",
        ]
        branches, parities = [], []
        for pair in PAIRS:
            self.nodes = 0
            certificate, parity = self._close_branch(pair)
            branches.append(certificate)
            derivation.append(f"{certificate.name}: {var_name(pair, ONE_EACH)} = 1 -> {certificate.reason} ({self.nodes} nodos)")
            if parity:
                parities.append(parity)

        z3_integer, _ = self._z3_check(integer=True)
        z3_relaxation, witness = self._z3_check(integer=False)
        derivation.append(f"z3 enteros: {z3_integer}; z3 relajación [0, 1]: {z3_relaxation}")

        notes = [
            "El perfil con tres votantes en y_1 y uno en y_2 tiene OPT = 0, así que el par (y_1, y_2) "
            "debe elegirse con probabilidad 1: se codifica q12(3,1) = 1, no q12(3,1) = 0.",
        ]
        logger.info("Discrepancia q12(3,1): se usa la restricción consistente q12(3,1) = 1")
        if self._pair_independent_solution():
            notes.append("Pair-Independent es una solución exacta (fracciones) de la relajación.")

        closed = all(b.closed for b in branches)
        status = "UNSAT" if closed and z3_integer == "unsat" else "SAT"
        if status == "SAT":
            logger.warning(f"r={self.r}: el sistema determinista no resultó insatisfacible")
        return UnsatCertificate(
            r=self.r,
            status=status,
            variables=self.variables,
            constraints=[con.describe() for con in self.constraints],
            branches=branches,
            parity_equation=parities[0] if parities else "",
            derivation=derivation,
            z3_integer=z3_integer,
            z3_relaxation=z3_relaxation,
            relaxation_witness=witness,
            notes=notes,
        )


def deterministic_impossibility(r: float) -> UnsatCertificate:
    return DeterministicImpossibility(r).certify()
