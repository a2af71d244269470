import logging
import math

import numpy as np
from scipy.optimize import linprog

from app.classes.election import CommitteeDistribution, PairDistribution, evaluate
from app.classes.exceptions import VerificationError
from app.classes.geometry import CandidateSet
from app.classes.mechanisms import Mechanism, PairIndependent, RandomDictator, SingleWinnerIndependent
from app.classes.reports import LineTwoElectionCheck, MinimaxResult, SingleWinnerCheck
from app.config import Config
from app.services.instances import (
    instance_simplex,
    is_simplex,
    profile_all_at,
    profiles_sigma6,
    profiles_thm_line,
    seven_thirds_profiles,
)

logger = logging.getLogger(__name__)

# Orden de los pares en el símplex de probabilidades (p12, p13, p23)
LINE3_PAIRS: tuple[tuple[int, int], ...] = ((1, 2), (1, 3), (2, 3))


# --- Pair-Independent en la instancia símplex ---
def pair_independent_ratio_instance3(m: int, r: float, n: int) -> float:
    """E[SC]/OPT of Pair-Independent on the profile with voters balanced over y_1, y_2 and y_m."""
    if n % 3:
        raise VerificationError(f"Error: n={n} debe ser múltiplo de 3.")
    case = next(c for c in profiles_sigma6(m, r, n) if c.label == "x^3")
    result = evaluate(PairIndependent().outcome(case.election), case.positions, case.election)
    return result["ratio"]


# --- Cotas inferiores en la recta ---
def _line_k_range(n: int, sigma: float) -> range:
    low = max(1, math.ceil(n / (2 * sigma - 1) - Config.DISTINCT_TOLERANCE))
    return range(low, n // 3 + 1)


def _randomized_line_bound(n: int, sigma: float, k: int) -> float | None:
    denominator = 2 * k * (sigma - 1) / (n - k) + (n - 5 * k) / (2 * k)
    if denominator <= 0:
        return None
    return (sigma - 2) / denominator


def _deterministic_line_bound(n: int, sigma: float, k: int) -> float:
    return min(2 * k * (sigma - 1) / (n - k), (n - k) / (2 * k))


def line_lower_bound(n: int, sigma: float, deterministic: bool) -> float:
    """
    Lower bound on the distortion of any SP mechanism on the 4-candidate line, maximized
    over every integer k in [ceil(n/(2 sigma - 1)), floor(n/3)]. 0 when no k is feasible.
    """
    if sigma < 3:
        raise VerificationError(f"Error: sigma={sigma} debe ser >= 3.")
    if n < 3:
        raise VerificationError(f"Error: n={n} debe ser >= 3.")
    best = 0.0
    for k in _line_k_range(n, sigma):
        value = _deterministic_line_bound(n, sigma, k) if deterministic else _randomized_line_bound(n, sigma, k)
        if value is not None and value > best:
            best = value
    return best


def line_k_choice(n: int, sigma: float) -> int:
    threshold = 2 * math.sqrt(sigma - 1) + 1
    return math.floor(n / threshold) if n >= threshold else 1


def line_two_election_check(mech: Mechanism, sigma: float, n: int, k: int) -> LineTwoElectionCheck:
    """
    Evaluates ``mech`` on (a^0, x^1) and (a^k, x^2) of the line construction; the larger
    ratio must reach the randomized bound at this k.
    Also reports the k picked by ``line_k_choice`` and the bound maximized over k.
    """
    p = profiles_thm_line(sigma, n, k, 0)
    gamma1 = evaluate(mech(p.a_0), p.x1, p.a_0)["ratio"]
    gamma2 = evaluate(mech(p.a_k), p.x2, p.a_k)["ratio"]
    bound = _randomized_line_bound(n, sigma, k)
    if bound is None:
        raise VerificationError(f"Error: la cota no está definida para n={n}, sigma={sigma}, k={k}.")
    proof_k = line_k_choice(n, sigma)
    return LineTwoElectionCheck(
        mechanism=mech.name, sigma=sigma, n=n, k=k,
        ratio_gamma1=gamma1, ratio_gamma2=gamma2, bound=bound,
        proof_k=proof_k, proof_k_bound=_randomized_line_bound(n, sigma, proof_k),
        max_bound=line_lower_bound(n, sigma, deterministic=False),
        passed=max(gamma1, gamma2) >= bound - Config.TOLERANCE,
    )


# --- Minimax 7/3 ---
def seven_thirds_case_ratios(dist: CommitteeDistribution) -> list[float]:
    """Ratios of a pair distribution on line3 at the three profiles (one per pair at OPT)."""
    return [evaluate(dist, case.positions, case.election)["ratio"] for case in seven_thirds_profiles()]


def _case_matrix() -> np.ndarray:
    # Coste de cada caso bajo cada par determinista; el ratio es lineal en p
    return np.array([
        seven_thirds_case_ratios(PairDistribution.point_mass(pair)) for pair in LINE3_PAIRS
    ]).T


def seven_thirds_minimax(grid_step: float) -> MinimaxResult:
    """
    min over (p12, p13, p23) of the worst case ratio, on a grid of the probability
    simplex and exactly through a linear program.
    """
    if not 0 < grid_step <= 0.05:
        raise VerificationError(f"Error: grid_step={grid_step} debe estar en (0, 0.05].")
    R = _case_matrix()

    steps = int(round(1 / grid_step))
    grid = np.array([(i, j, steps - i - j) for i in range(steps + 1) for j in range(steps + 1 - i)], dtype=float) / steps
    worst = (grid @ R.T).max(axis=1)
    best = int(np.argmin(worst))

    # min z  s.a.  R p - z <= 0,  sum(p) = 1,  0 <= p <= 1
    lp = linprog(
        c=[0.0, 0.0, 0.0, 1.0],
        A_ub=np.hstack([R, -np.ones((3, 1))]),
        b_ub=np.zeros(3),
        A_eq=[[1.0, 1.0, 1.0, 0.0]],
        b_eq=[1.0],
        bounds=[(0.0, 1.0)] * 3 + [(None, None)],
        method="highs",
    )
    if not lp.success:
        raise VerificationError(f"Error: el programa lineal no converge: {lp.message}")

    return MinimaxResult(
        grid_step=grid_step,
        value=float(worst[best]),
        argmin=tuple(float(v) for v in grid[best]),
        lp_value=float(lp.fun),
        lp_argmin=tuple(float(v) for v in lp.x[:3]),
        grid_points=len(grid),
    )


# --- Caracterización de Random Dictator ---
def random_dictator_uniqueness_check(n: int, m: int, r: float,
                                     mechanism: SingleWinnerIndependent | None = None) -> SingleWinnerCheck:
    """
    Checks that a single-winner independent mechanism is affine in the vote count with a
    common slope, and looks for an infinite-distortion witness (every voter on one
    candidate, OPT = 0). Random Dictator passes with slope 1/n and zero intercepts.
    """
    if not 1 <= n <= 10 or not 3 <= m <= 5:
        raise VerificationError(f"Error: se requiere n <= 10 y 3 <= m <= 5 (recibido n={n}, m={m}).")
    mech = mechanism or RandomDictator()
    cs = instance_simplex(m, r)
    tol = Config.TOLERANCE

    table = np.array([[mech.probability(k, c, n, m) for c in range(n + 1)] for k in cs.indices()])
    differences = np.diff(table, axis=1)
    affine = bool(np.all(np.abs(differences - differences[0, 0]) <= tol))
    slope = float(differences[0, 0]) if affine else None
    intercepts = [float(v) for v in table[:, 0]]

    witness, witness_ratio = None, None
    # Primero todos sobre y_m; después el resto de candidatos
    for k in [m] + list(range(1, m)):
        case = profile_all_at(cs, k, n)
        value = evaluate(mech(case.election), case.positions, case.election)["ratio"]
        if math.isinf(value):
            witness, witness_ratio = k, value
            break

    passed = (
        affine and witness is None
        and abs(slope - 1.0 / n) <= tol
        and all(abs(b) <= tol for b in intercepts)
    )
    if not passed:
        logger.info(f"{mech.name}: afín={affine}, pendiente={slope}, interceptos={intercepts}, testigo={witness}")
    return SingleWinnerCheck(
        mechanism=mech.name, n=n, m=m, r=r,
        affine=affine, slope=slope, intercepts=intercepts,
        witness_found=witness is not None,
        witness_candidate=witness,
        witness_ratio=witness_ratio,
        passed=passed,
    )


# --- Tabla de cotas analíticas ---
def analytic_bounds(mechanism_id: str, cs: CandidateSet, n: int) -> tuple[float | None, float | None]:
    """(upper, lower) distortion bounds known for a mechanism on an instance, None if unknown."""
    sigma = cs.sigma
    if mechanism_id == "two-extremes":
        if cs.dimension != 1:
            return None, None
        bound = float(2 * n - 3)
        return bound, bound if cs.name == "line3" else None
    if mechanism_id == "pair-independent":
        upper = 1 + 6 * sigma
        if is_simplex(cs) and cs.m > 3:
            return upper, sigma / 6
        if cs.name == "line4" and n >= 3:
            return upper, line_lower_bound(n, sigma, deterministic=False)
        if cs.name == "line3":
            return upper, 7 / 3
        return upper, None
    if mechanism_id == "sequential-dictator":
        bound = 2 * (n - 2) * sigma + 1
        return bound, bound if cs.name == "multi4" else None
    return None, None

