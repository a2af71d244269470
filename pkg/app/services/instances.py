import logging
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from typing import Any, Callable, Sequence

import numpy as np

from app.classes.election import Election, LocationProfile, is_consistent, nearest_candidates
from app.classes.exceptions import ConfigError, GeometryError, ProfileError
from app.classes.geometry import CandidateSet, Point, distance, midpoint
from app.config import Config

logger = logging.getLogger(__name__)


# --- Instancias ---
def instance_line4(sigma: float) -> CandidateSet:
    """Four candidates on the line at (-sigma+2, 0, 1, 2); d_min = 1 and d_max = sigma."""
    if sigma < 3:
        raise GeometryError(f"Error: line4 requiere sigma >= 3 (recibido {sigma}).")
    return CandidateSet([-sigma + 2, 0.0, 1.0, 2.0], name="line4", params={"sigma": sigma})


def instance_line3() -> CandidateSet:
    return CandidateSet([-2.0, 0.0, 2.0], name="line3")


def instance_simplex(m: int, r: float, name: str = "simplex") -> CandidateSet:
    """
    m candidates in (m-1)-dimensional space: y_k is the k-th unit vector for k < m and
    y_m = (r, ..., r). Simplex vertices are sqrt(2) apart and all equally far from y_m.
    """
    if m < 3:
        raise GeometryError(f"Error: la instancia símplex requiere m >= 3 (recibido {m}).")
    if r <= 2:
        raise GeometryError(f"Error: la instancia símplex requiere r > 2 (recibido {r}).")
    vertices = np.eye(m - 1).tolist() + [[float(r)] * (m - 1)]
    return CandidateSet(vertices, name=name, params={"m": m, "r": r})


def instance_multi4(r: float) -> CandidateSet:
    return instance_simplex(4, r, name="multi4")


def is_simplex(cs: CandidateSet) -> bool:
    return cs.name in ("simplex", "multi4") and {"m", "r"} <= cs.params.keys()


INSTANCES: dict[str, Callable[..., CandidateSet]] = {
    "line3": instance_line3,
    "line4": instance_line4,
    "simplex": instance_simplex,
    "multi4": instance_multi4,
}

# Parámetros que acepta cada instancia (el resto de flags se ignoran)
INSTANCE_PARAMS: dict[str, tuple[str, ...]] = {
    "line3": (),
    "line4": ("sigma",),
    "simplex": ("m", "r"),
    "multi4": ("r",),
}


def build_instance(instance_id: str, **params) -> CandidateSet:
    """
    Builds a builtin instance by id. Missing parameters fall back to the defaults used
    for sweeps (r = Config.DEFAULT_R, m = 4).
    """
    if instance_id not in INSTANCES:
        raise ConfigError(f"Error: instancia '{instance_id}' desconocida. Disponibles: {', '.join(INSTANCES)}.")
    accepted = INSTANCE_PARAMS[instance_id]
    kwargs = {k: v for k, v in params.items() if k in accepted and v is not None}
    if "r" in accepted:
        kwargs.setdefault("r", Config.DEFAULT_R)
    if "m" in accepted:
        kwargs.setdefault("m", 4)
        kwargs["m"] = int(kwargs["m"])
    if "sigma" in accepted and "sigma" not in kwargs:
        raise ConfigError("Error: la instancia line4 necesita --sigma.")
    return INSTANCES[instance_id](**kwargs)


# --- Perfiles nombrados ---
@dataclass(frozen=True)
class ProfileCase:
    """
    An election together with a location profile consistent with it. Voters standing on
    a nearest-candidate tie are listed in ``ties`` (1-based) so every tie branch counts
    as truthful.
    """
    label: str
    election: Election
    positions: LocationProfile

    def __post_init__(self):
        if not is_consistent(self.positions, self.election):
            raise ProfileError(f"Error: el perfil '{self.label}' no es consistente con sus acciones.")

    @property
    def ties(self) -> tuple[int, ...]:
        cs = self.election.candidates
        return tuple(v for v, p in enumerate(self.positions, start=1) if len(nearest_candidates(p, cs)) > 1)


@dataclass(frozen=True)
class NamedProfileFamily:
    id: str
    candidates: CandidateSet
    params: dict[str, Any] = field(hash=False)
    cases: tuple[ProfileCase, ...]

    def case(self, label: str) -> ProfileCase:
        for c in self.cases:
            if c.label == label:
                return c
        raise KeyError(f"Caso '{label}' no encontrado en la familia {self.id}.")

    def labels(self) -> list[str]:
        return [c.label for c in self.cases]


def _positions(groups: Sequence[tuple[Point, int]]) -> LocationProfile:
    return LocationProfile(tuple(p for p, count in groups for _ in range(count)))


def _actions(groups: Sequence[tuple[int, int]]) -> tuple[int, ...]:
    return tuple(a for a, count in groups for _ in range(count))


@dataclass(frozen=True)
class LineProfiles:
    """Action profiles a^0, a^t, a^k and location profiles x^1..x^3 on line4."""
    candidates: CandidateSet
    k: int
    t: int
    a_t: Election
    a_0: Election
    a_k: Election
    x1: LocationProfile  # votantes en y1, y3, y4 (con a^0)
    x2: LocationProfile  # votantes en y2, y3, y4 (con a^k)
    x3: LocationProfile  # k votantes en el punto medio de (y1, y2)

    @property
    def indifferent_voter(self) -> int | None:
        """The voter switching from y_1 to y_2 between a^t and a^(t+1)."""
        return self.k - self.t if self.t < self.k else None


def _line_action_profile(cs: CandidateSet, n: int, k: int, t: int) -> Election:
    half = (n - k) // 2
    return Election(cs, _actions([(1, k - t), (2, t), (3, half), (4, half)]))


def profiles_thm_line(sigma: float, n: int, k: int, t: int) -> LineProfiles:
    cs = instance_line4(sigma)
    low = n / (2 * sigma - 1)
    if k < low - Config.DISTINCT_TOLERANCE or 3 * k > n:
        raise ProfileError(f"Error: k={k} fuera de [n/(2 sigma-1), n/3] = [{low:.6g}, {n / 3:.6g}].")
    if k < 1:
        raise ProfileError(f"Error: k={k} debe ser >= 1.")
    if (n - k) % 2:
        raise ProfileError(f"Error: n-k = {n - k} debe ser par para que (n+k)/2 sea entero.")
    if not 0 <= t <= k:
        raise ProfileError(f"Error: t={t} fuera de [0, k={k}].")

    half = (n - k) // 2
    y = cs.points
    tail = [(y[2], half), (y[3], half)]
    profiles = LineProfiles(
        candidates=cs, k=k, t=t,
        a_t=_line_action_profile(cs, n, k, t),
        a_0=_line_action_profile(cs, n, k, 0),
        a_k=_line_action_profile(cs, n, k, k),
        x1=_positions([(y[0], k)] + tail),
        x2=_positions([(y[1], k)] + tail),
        x3=_positions([(midpoint(y[0], y[1]), k)] + tail),
    )
    # Comprobación en generación
    for x, e in ((profiles.x1, profiles.a_0), (profiles.x2, profiles.a_k), (profiles.x3, profiles.a_t)):
        if not is_consistent(x, e):
            raise ProfileError("Error: perfil de la recta inconsistente.")
    return profiles


def _balanced_counts(n: int) -> tuple[int, int, int]:
    base, extra = divmod(n, 3)
    return tuple(base + (1 if g < extra else 0) for g in range(3))


def profiles_sigma6(m: int, r: float, n: int) -> list[ProfileCase]:
    """
    Profiles x^1 (voters at y_1, y_2), x^2 (balanced at y_1, y_2, y_3) and x^3
    (balanced at y_1, y_2, y_m) on the simplex instance.
    """
    if m < 4:
        raise ProfileError(f"Error: m={m} debe ser >= 4.")
    if n < 3:
        raise ProfileError(f"Error: n={n} debe ser >= 3.")
    cs = instance_simplex(m, r)
    n1, n2, n3 = _balanced_counts(n)
    cases = []
    for label, groups in (
        ("x^1", [(1, n1), (2, n - n1)]),
        ("x^2", [(1, n1), (2, n2), (3, n3)]),
        ("x^3", [(1, n1), (2, n2), (m, n3)]),
    ):
        cases.append(ProfileCase(
            label,
            Election(cs, _actions(groups)),
            _positions([(cs[a], c) for a, c in groups]),
        ))
    return cases


def worstcase_two_extremes(n: int) -> ProfileCase:
    """x = (-1, 0, ..., 0, 2) on line3; voter 1 sits on the (y_1, y_2) tie and votes y_1."""
    if n < 3:
        raise ProfileError(f"Error: n={n} debe ser >= 3.")
    cs = instance_line3()
    election = Election(cs, _actions([(1, 1), (2, n - 2), (3, 1)]))
    positions = LocationProfile.of([-1.0] + [0.0] * (n - 2) + [2.0])
    return ProfileCase("worst-case", election, positions)


def worstcase_sequential_dictator(r: float, n: int) -> ProfileCase:
    """x = (y_1, (1/2, 1/2, 0), y_4, ..., y_4) on multi4; voter 2 votes y_2."""
    if n < 3:
        raise ProfileError(f"Error: n={n} debe ser >= 3.")
    cs = instance_multi4(r)
    election = Election(cs, _actions([(1, 1), (2, 1), (4, n - 2)]))
    positions = LocationProfile((cs[1], midpoint(cs[1], cs[2])) + (cs[4],) * (n - 2))
    return ProfileCase("worst-case", election, positions)


def seven_thirds_profiles() -> list[ProfileCase]:
    """
    a = (1, 2, 3) on line3 with the three placements used against p_12, p_23 and p_13.
    Each has OPT = 1; the pair attaining it gets cost 1 and the other two cost 3.
    """
    cs = instance_line3()
    election = Election(cs, (1, 2, 3))
    return [
        ProfileCase("x^1", election, LocationProfile.of([-2.0, 0.0, 1.0])),
        ProfileCase("x^1-mirror", election, LocationProfile.of([-1.0, 0.0, 2.0])),
        ProfileCase("x^2", election, LocationProfile.of([-2.0, -1.0, 2.0])),
    ]


# Perfiles x^1..x^8 con 4 votantes sobre multi4 (todos en candidatos)
MULTI_DETER_ACTIONS: dict[str, tuple[int, int, int, int]] = {
    "x^1": (1, 1, 1, 2),
    "x^2": (1, 2, 3, 4),
    "x^3": (2, 2, 3, 4),
    "x^4": (1, 2, 2, 4),
    "x^5": (1, 2, 2, 3),
    "x^6": (1, 3, 4, 4),
    "x^7": (1, 2, 4, 4),
    "x^8": (2, 3, 4, 4),
}


def profiles_multi_deter(r: float) -> list[ProfileCase]:
    cs = instance_multi4(r)
    return [
        ProfileCase(label, Election(cs, actions), LocationProfile(tuple(cs[a] for a in actions)))
        for label, actions in MULTI_DETER_ACTIONS.items()
    ]


def profile_all_at(cs: CandidateSet, k: int, n: int) -> ProfileCase:
    """n votantes sobre y_k, todos votando y_k."""
    return ProfileCase(f"all-at-y{k}", Election(cs, (k,) * n), LocationProfile((cs[k],) * n))


# --- Puntos de prueba de los subespacios equidistantes ---
def _check_range(values: Sequence[float], low: float, high: float, label: str) -> None:
    eps = Config.DISTINCT_TOLERANCE
    if any(v < low - eps or v > high + eps for v in values) or any(a > b + eps for a, b in zip(values, values[1:])):
        raise ProfileError(f"Error: {label} requiere {low:g} <= alfas crecientes <= {high:g} (recibido {tuple(values)}).")


def lemma1_test_points(m: int, r: float, i: int, j: int, L: Sequence[int], alphas: Sequence[Sequence[float]]) -> list[Point]:
    """
    Points of the simplex instance that are equidistant from y_i and y_j and at least as
    close to them as to any other candidate. ``L`` is ordered: L[0] is the coordinate
    that balances the template, L[1:] share the first alpha.

    Templates (coordinates t_1..t_{m-1}, h ranges over the remaining coordinates):
      * m in {i, j}, with i the simplex index: t_i = (r+1)/2,
        t_{L[0]} = (m-2)r/2 - (w-1)a1 - (m-w-2)a2, t_{L[1:]} = a1, t_h = a2,
        r/2 <= a1 <= a2 <= (r+1)/2.
      * m in L (L[0] = m): t_i = t_j = 1/2, t_{L[1:]} = a1, t_h = a2, 0 <= a1 <= a2 <= 1/2.
      * m not in L: t_i = t_j = 1/2, t_{L[0]} = a1, t_{L[1:]} = a2, t_h = a3,
        0 <= a1 <= a2 <= a3 <= 1/2.
    """
    cs = instance_simplex(m, r)
    L = tuple(int(l) for l in L)
    w = len(L)
    if w not in (1, 2) or w >= m - 1:
        raise ProfileError(f"Error: |L|={w} debe ser 1 o 2 y menor que m-1={m - 1}.")
    if i == j or not (1 <= i <= m and 1 <= j <= m):
        raise ProfileError(f"Error: índices i={i}, j={j} inválidos.")
    if i in L or j in L or len(set(L)) != w or not all(1 <= l <= m for l in L):
        raise ProfileError(f"Error: L={L} debe excluir i y j y no repetir índices.")

    points = []
    for alpha in alphas:
        alpha = tuple(float(a) for a in alpha)
        t = np.zeros(m - 1)
        if m in (i, j):
            a1, a2 = _unpack(alpha, 2)
            _check_range((a1, a2), r / 2, (r + 1) / 2, "el caso con y_m en el par")
            base = i if j == m else j
            t[:] = a2
            t[base - 1] = (r + 1) / 2
            for l in L[1:]:
                t[l - 1] = a1
            t[L[0] - 1] = (m - 2) * r / 2 - (w - 1) * a1 - (m - w - 2) * a2
        elif m in L:
            if L[0] != m:
                raise ProfileError(f"Error: si m pertenece a L debe ir primero (L={L}).")
            a1, a2 = _unpack(alpha, 2)
            _check_range((a1, a2), 0.0, 0.5, "el caso con y_m en L")
            t[:] = a2
            t[i - 1] = t[j - 1] = 0.5
            for l in L[1:]:
                t[l - 1] = a1
        else:
            a1, a2, a3 = _unpack(alpha, 3)
            _check_range((a1, a2, a3), 0.0, 0.5, "el caso sin y_m")
            t[:] = a3
            t[i - 1] = t[j - 1] = 0.5
            t[L[0] - 1] = a1
            for l in L[1:]:
                t[l - 1] = a2
        point = Point(tuple(float(v) for v in t))
        _verify_equidistant(point, cs, i, j)
        points.append(point)
    return points


def _unpack(alpha: tuple[float, ...], size: int) -> tuple[float, ...]:
    if len(alpha) != size:
        raise ProfileError(f"Error: se esperaban {size} alfas, recibidos {len(alpha)}.")
    return alpha


def _verify_equidistant(point: Point, cs: CandidateSet, i: int, j: int) -> None:
    d_i, d_j = distance(point, cs[i]), distance(point, cs[j])
    tol = Config.TOLERANCE
    if abs(d_i - d_j) > tol or any(distance(point, y) < max(d_i, d_j) - tol for y in cs):
        raise ProfileError(f"Error: el punto {point} no es equidistante y más cercano a y_{i}, y_{j}.")


def _alpha_grid(low: float, high: float, step: float) -> list[float]:
    count = max(1, int(round((high - low) / step)))
    return [float(v) for v in np.linspace(low, high, count + 1)]


def lemma1_cases(m: int) -> list[tuple[int, int, tuple[int, ...]]]:
    """Every admissible (i, j, L) with |L| in {1, 2} and |L| < m - 1; L[0] is the balancing index."""
    cases = []
    simplex = range(1, m)
    for i, j in combinations(range(1, m + 1), 2):
        for w in (1, 2):
            if w >= m - 1:
                continue
            if j == m:
                firsts = [l for l in simplex if l != i]
                for l1 in firsts:
                    for rest in combinations([l for l in simplex if l not in (i, l1)], w - 1):
                        cases.append((i, j, (l1,) + rest))
            else:
                others = [l for l in simplex if l not in (i, j)]
                for rest in combinations(others, w - 1):
                    cases.append((i, j, (m,) + rest))
                for l1 in others:
                    for rest in combinations([l for l in others if l != l1], w - 1):
                        cases.append((i, j, (l1,) + rest))
    return cases


def lemma1_suite(m: int, r: float, step: float | None = None) -> list[tuple[tuple[int, int, tuple[int, ...]], Point]]:
    """All test points of every admissible (i, j, L) on an alpha grid of the given step."""
    step = step or Config.SP_ALPHA_STEP
    high_grid = _alpha_grid(r / 2, (r + 1) / 2, step)
    low_grid = _alpha_grid(0.0, 0.5, step)
    suite = []
    for i, j, L in lemma1_cases(m):
        if j == m:
            alphas = list(combinations_with_replacement(high_grid, 2))
        elif L[0] == m:
            alphas = list(combinations_with_replacement(low_grid, 2))
        else:
            alphas = list(combinations_with_replacement(low_grid, 3))
        for point in lemma1_test_points(m, r, i, j, L, alphas):
            suite.append(((i, j, L), point))
    return suite


# --- Registro de familias ---
def _family_thm_line(sigma: float = 9.0, n: int = 10, k: int = 2, t: int = 0) -> NamedProfileFamily:
    p = profiles_thm_line(sigma, n, k, t)
    cases = (
        ProfileCase("x^1", p.a_0, p.x1),
        ProfileCase("x^2", p.a_k, p.x2),
        ProfileCase("x^3", p.a_t, p.x3),
    )
    return NamedProfileFamily("thm-line", p.candidates, {"sigma": sigma, "n": n, "k": k, "t": t}, cases)


def _family_thm_line_det(sigma: float = 9.0, n: int = 10, k: int = 2, t: int = 0) -> NamedProfileFamily:
    p = profiles_thm_line(sigma, n, k, t)
    cases = (
        ProfileCase("x^1", p.a_t, p.x3),
        ProfileCase("x^2", p.a_0, p.x1),
        ProfileCase("x^3", p.a_k, p.x2),
    )
    return NamedProfileFamily("thm-line-det", p.candidates, {"sigma": sigma, "n": n, "k": k, "t": t}, cases)


def _family_thm_line3() -> NamedProfileFamily:
    return NamedProfileFamily("thm-line3", instance_line3(), {}, tuple(seven_thirds_profiles()))


def _family_thm_two_extremes(n: int = 5) -> NamedProfileFamily:
    case = worstcase_two_extremes(n)
    return NamedProfileFamily("thm-two-extremes", case.election.candidates, {"n": n}, (case,))


def _family_thm_sigma6(m: int = 4, r: float = 3.0, n: int = 3) -> NamedProfileFamily:
    cases = tuple(profiles_sigma6(m, r, n))
    return NamedProfileFamily("thm-sigma6", cases[0].election.candidates, {"m": m, "r": r, "n": n}, cases)


def _family_thm_multi_deter(r: float = 3.0) -> NamedProfileFamily:
    cases = tuple(profiles_multi_deter(r))
    return NamedProfileFamily("thm-multi-deter", cases[0].election.candidates, {"r": r}, cases)


def _family_thm_sd(r: float = 3.0, n: int = 5) -> NamedProfileFamily:
    case = worstcase_sequential_dictator(r, n)
    return NamedProfileFamily("thm-sd", case.election.candidates, {"r": r, "n": n}, (case,))


def _family_thm_rd(m: int = 4, r: float = 3.0, n: int = 4) -> NamedProfileFamily:
    cs = instance_simplex(m, r)
    return NamedProfileFamily("thm-rd", cs, {"m": m, "r": r, "n": n}, (profile_all_at(cs, m, n),))


FAMILIES: dict[str, Callable[..., NamedProfileFamily]] = {
    "thm-line": _family_thm_line,
    "thm-line-det": _family_thm_line_det,
    "thm-line3": _family_thm_line3,
    "thm-two-extremes": _family_thm_two_extremes,
    "thm-sigma6": _family_thm_sigma6,
    "thm-multi-deter": _family_thm_multi_deter,
    "thm-sd": _family_thm_sd,
    "thm-rd": _family_thm_rd,
}


def build_family(family_id: str, **params) -> NamedProfileFamily:
    factory = FAMILIES.get(family_id)
    if factory is None:
        raise ConfigError(f"Error: familia '{family_id}' desconocida. Disponibles: {', '.join(FAMILIES)}.")
    try:
        return factory(**params)
    except TypeError as e:
        raise ConfigError(f"Error: parámetros inválidos para {family_id}: {e}")


def list_families() -> list[str]:
    return list(FAMILIES)
