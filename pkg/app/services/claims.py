import logging
import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from app.classes.election import LocationProfile, evaluate, opt
from app.classes.exceptions import ConfigError, MechanismError
from app.classes.geometry import CandidateSet
from app.classes.mechanisms import (
    ComplementPairIndependent,
    PairIndependent,
    SequentialDictator,
    SingleWinnerIndependent,
    TwoExtremes,
    VoteCounts,
    affine_single_winner,
    get_mechanism,
    is_monotone,
)
from app.classes.reports import ClaimResult
from app.config import Config
from app.services.bounds import (
    line_lower_bound,
    line_two_election_check,
    pair_independent_ratio_instance3,
    random_dictator_uniqueness_check,
    seven_thirds_minimax,
)
from app.services.distortion import compositions, distortion_search
from app.services.impossibility import deterministic_impossibility
from app.services.instances import (
    FAMILIES,
    build_family,
    instance_line3,
    instance_line4,
    instance_multi4,
    instance_simplex,
    worstcase_sequential_dictator,
    worstcase_two_extremes,
)
from app.services.strategy_proof import check_strategy_proof

logger = logging.getLogger(__name__)


def _values(value: Any, default: list) -> list:
    """Un parámetro escalar se convierte en lista de un elemento."""
    if value is None:
        return list(default)
    if isinstance(value, (list, tuple, range)):
        return list(value)
    return [value]


def _fmt(value: float) -> str:
    return f"{value:.12g}"


# --- Claims ---
def claim_two_extremes_tight(n: Any = None) -> ClaimResult:
    ns = [int(v) for v in _values(n, range(3, 9))]
    rows, passed = [], True
    cs = instance_line3()
    for size in ns:
        case = worstcase_two_extremes(size)
        ratio = evaluate(TwoExtremes()(case.election), case.positions, case.election)["ratio"]
        found = distortion_search(TwoExtremes(), cs, size).best_ratio
        bound = 2 * size - 3
        ok = abs(ratio - bound) <= Config.TOLERANCE and abs(found - bound) <= Config.TOLERANCE
        passed &= ok
        rows.append({"n": size, "expected": bound, "worst_case_ratio": ratio, "search_ratio": found, "passed": ok})
    return ClaimResult(
        claim_id="two-extremes-tight", passed=passed,
        expected=", ".join(f"2n-3={2 * v - 3}" for v in ns),
        observed=", ".join(_fmt(row["search_ratio"]) for row in rows),
        params={"n": ns}, details={"rows": rows},
    )


def claim_pair_independent_valid(max_n: int = 12, max_m: int = 5) -> ClaimResult:
    mech = PairIndependent()
    invalid, non_monotone, checked = [], [], 0
    for m in range(2, int(max_m) + 1):
        for n in range(1, int(max_n) + 1):
            for counts in compositions(n, m):
                checked += 1
                try:
                    d = mech.distribution(VoteCounts(counts))
                except MechanismError as e:
                    invalid.append({"counts": list(counts), "error": str(e)})
                    continue
                if any(p < -Config.DISTINCT_TOLERANCE for _, p in d.items()):
                    invalid.append({"counts": list(counts), "error": "probabilidad negativa"})
            if not is_monotone(mech, n, m):
                non_monotone.append({"n": n, "m": m})
    passed = not invalid and not non_monotone
    return ClaimResult(
        claim_id="pair-independent-valid", passed=passed,
        expected="distribuciones válidas y monótonas",
        observed=f"{checked} recuentos, {len(invalid)} inválidos, {len(non_monotone)} no monótonos",
        params={"max_n": max_n, "max_m": max_m},
        details={"invalid": invalid[:20], "non_monotone": non_monotone},
    )


def claim_pair_independent_bound(m: Any = None, r: Any = None, n: Any = None) -> ClaimResult:
    rows, passed = [], True
    for size_m in _values(m, [4, 5]):
        for radius in _values(r, [3.0, 5.0, 10.0]):
            cs = instance_simplex(int(size_m), float(radius))
            bound = 1 + 6 * cs.sigma
            for size in _values(n, [3, 6, 9]):
                found = distortion_search(PairIndependent(), cs, int(size)).best_ratio
                ok = found <= bound + Config.TOLERANCE
                passed &= ok
                rows.append({"m": size_m, "r": radius, "n": size, "search_ratio": found, "upper_bound": bound, "passed": ok})

    checks = []
    for radius in _values(r, [3.0, 5.0, 10.0]):
        sigma = instance_simplex(4, float(radius)).sigma
        value = pair_independent_ratio_instance3(4, float(radius), 3)
        ok = abs(value - (sigma + 2) / 3) <= Config.TOLERANCE and value >= sigma / 6
        passed &= ok
        checks.append({"r": radius, "ratio": value, "expected": (sigma + 2) / 3, "sigma_over_6": sigma / 6, "passed": ok})

    worst = max(rows, key=lambda row: row["search_ratio"] / row["upper_bound"])
    return ClaimResult(
        claim_id="pair-independent-bound", passed=passed,
        expected="ratio <= 1+6σ; ratio(x^3) = (σ+2)/3 >= σ/6",
        observed=f"máximo ratio/(1+6σ) = {_fmt(worst['search_ratio'] / worst['upper_bound'])}",
        params={"m": m, "r": r, "n": n}, details={"rows": rows, "instance3": checks},
    )


def claim_sequential_dictator_tight(n: Any = None, r: Any = None) -> ClaimResult:
    rows, passed = [], True
    tol = 1e-6
    for radius in _values(r, [3.0, 10.0]):
        cs = instance_multi4(float(radius))
        for size in _values(n, range(3, 9)):
            size = int(size)
            case = worstcase_sequential_dictator(float(radius), size)
            ratio = evaluate(SequentialDictator()(case.election), case.positions, case.election)["ratio"]
            found = distortion_search(SequentialDictator(), cs, size).best_ratio
            bound = 2 * (size - 2) * cs.sigma + 1
            ok = abs(ratio - bound) <= tol and abs(found - bound) <= tol
            passed &= ok
            rows.append({"n": size, "r": radius, "expected": bound, "worst_case_ratio": ratio, "search_ratio": found, "passed": ok})
    return ClaimResult(
        claim_id="sequential-dictator-tight", passed=passed,
        expected="2(n-2)σ+1",
        observed=", ".join(_fmt(row["search_ratio"]) for row in rows),
        params={"n": n, "r": r}, details={"rows": rows},
    )


def claim_seven_thirds(step: float = 0.01) -> ClaimResult:
    result = seven_thirds_minimax(float(step))
    target = 7 / 3
    passed = (
        abs(result.value - target) <= 0.02
        and all(abs(p - 1 / 3) <= 0.02 for p in result.argmin)
        and abs(result.lp_value - target) <= 1e-6
    )
    return ClaimResult(
        claim_id="seven-thirds", passed=passed,
        expected=f"7/3 ± 0.02 ({_fmt(target)})",
        observed=_fmt(result.value),
        params={"step": step}, details=result.model_dump(),
    )


def claim_det_impossibility(r: float = 3.0) -> ClaimResult:
    certificate = deterministic_impossibility(float(r))
    passed = (
        certificate.status == "UNSAT"
        and all(b.closed for b in certificate.branches)
        and certificate.z3_relaxation == "sat"
    )
    return ClaimResult(
        claim_id="det-impossibility", passed=passed,
        expected="UNSAT (relajación SAT)",
        observed=f"{certificate.status} (relajación {certificate.z3_relaxation.upper()})",
        params={"r": r}, details=certificate.model_dump(),
    )


def claim_strategy_proof(max_n: int = 4, sigma: float = 9.0, r: float = 3.0) -> ClaimResult:
    suites = {
        "line3": instance_line3(),
        "line4": instance_line4(float(sigma)),
        "multi4": instance_multi4(float(r)),
    }
    plan = [("two-extremes", "line3"), ("two-extremes", "line4")]
    plan += [(mech, suite) for mech in ("pair-independent", "random-dictator", "sequential-dictator") for suite in suites]

    rows, passed = [], True
    for mechanism_id, suite in plan:
        report = check_strategy_proof(get_mechanism(mechanism_id), suites[suite], max_n=int(max_n))
        ok = report.passed and not report.truncated
        passed &= ok
        rows.append({"mechanism": mechanism_id, "instance": suite, "test_points": report.test_points,
                     "violations": report.violation_count, "truncated": report.truncated, "passed": ok})

    planted = check_strategy_proof(ComplementPairIndependent(), suites["multi4"], max_n=int(max_n))
    detected = planted.violation_count > 0
    passed &= detected
    rows.append({"mechanism": planted.mechanism, "instance": "multi4", "test_points": planted.test_points,
                 "violations": planted.violation_count, "truncated": planted.truncated, "passed": detected})
    return ClaimResult(
        claim_id="strategy-proof", passed=passed,
        expected="0 violaciones (mecanismo de control: >= 1)",
        observed=", ".join(f"{row['mechanism']}@{row['instance']}={row['violations']}" for row in rows),
        params={"max_n": max_n, "sigma": sigma, "r": r},
        details={"rows": rows, "planted_example": planted.violations[0].model_dump() if planted.violations else None},
    )


def claim_line_lower_bounds(sigma: float = 9.0, n: int = 10, k: int = 2) -> ClaimResult:
    failures, points = [], 0
    for size in range(6, 61, 6):
        for s in np.linspace(3, 400, 10):
            points += 1
            target = min(size, math.sqrt(s))
            randomized = line_lower_bound(size, float(s), deterministic=False)
            deterministic = line_lower_bound(size, float(s), deterministic=True)
            if randomized < target / 12 - Config.TOLERANCE or deterministic < target / 3 - Config.TOLERANCE:
                failures.append({"n": size, "sigma": float(s), "randomized": randomized, "deterministic": deterministic})

    check = line_two_election_check(PairIndependent(), float(sigma), int(n), int(k))
    passed = not failures and check.passed
    return ClaimResult(
        claim_id="line-lower-bounds", passed=passed,
        expected=f"cotas >= min(n, √σ)/12 y /3; max(Γ1, Γ2) >= {_fmt(check.bound)}",
        observed=f"{points - len(failures)}/{points} puntos; max(Γ1, Γ2) = {_fmt(max(check.ratio_gamma1, check.ratio_gamma2))}"
                 f"; k de la prueba = {check.proof_k}, cota máxima = {_fmt(check.max_bound)}",
        params={"sigma": sigma, "n": n, "k": k},
        details={"failures": failures, "two_election": check.model_dump()},
    )


def claim_random_dictator_unique(n: int = 4, m: int = 4, r: float = 3.0) -> ClaimResult:
    n, m, r = int(n), int(m), float(r)
    rd = random_dictator_uniqueness_check(n, m, r)
    controls: list[SingleWinnerIndependent] = [
        affine_single_winner([0.1] + [0.0] * (m - 1), name="affine(b1=0.1)"),
        SingleWinnerIndependent("constant", lambda k, n_k, total, size: 1.0 / size),
    ]
    flagged = [random_dictator_uniqueness_check(n, m, r, mechanism=mech) for mech in controls]
    passed = rd.passed and all(c.witness_found and not c.passed for c in flagged)
    return ClaimResult(
        claim_id="random-dictator-unique", passed=passed,
        expected=f"pendiente 1/n = {_fmt(1 / n)}; testigos de distorsión infinita para los controles",
        observed=f"pendiente {_fmt(rd.slope) if rd.slope is not None else 'no afín'}; "
                 f"testigos {[c.witness_candidate for c in flagged]}",
        params={"n": n, "m": m, "r": r},
        details={"random_dictator": rd.model_dump(), "controls": [c.model_dump() for c in flagged]},
    )


def brute_force_opt(candidates: CandidateSet, positions: LocationProfile) -> tuple[tuple[int, int], float]:
    """Recomputes OPT with plain math.dist over every pair in lexicographic order."""
    best_pair, best_cost = None, math.inf
    points = [c.coords for c in candidates]
    for k in range(len(points)):
        for l in range(k + 1, len(points)):
            cost = sum(min(math.dist(x.coords, points[k]), math.dist(x.coords, points[l])) for x in positions)
            if cost < best_cost:
                best_pair, best_cost = (k + 1, l + 1), cost
    return best_pair, best_cost


def claim_opt_oracle(count: int = 1000, seed: int | None = None) -> ClaimResult:
    seed = Config.SEED if seed is None else int(seed)
    rng = np.random.default_rng(seed)
    mismatches = []
    for trial in range(int(count)):
        m, n, d = int(rng.integers(2, 7)), int(rng.integers(1, 9)), int(rng.integers(1, 5))
        cs = CandidateSet(rng.uniform(-10, 10, size=(m, d)).tolist())
        x = LocationProfile.of(rng.uniform(-10, 10, size=(n, d)).tolist())
        pair, cost = opt(x, cs)
        expected_pair, expected_cost = brute_force_opt(cs, x)
        if pair != expected_pair or abs(cost - expected_cost) > Config.TOLERANCE:
            mismatches.append({"trial": trial, "opt": list(pair), "brute_force": list(expected_pair)})
    return ClaimResult(
        claim_id="opt-oracle", passed=not mismatches,
        expected=f"{count} coincidencias exactas",
        observed=f"{int(count) - len(mismatches)} coincidencias",
        params={"count": count, "seed": seed}, details={"mismatches": mismatches[:20]},
    )


@dataclass(frozen=True)
class Claim:
    id: str
    run: Callable[..., ClaimResult]
    summary: str


CLAIMS: dict[str, Claim] = {c.id: c for c in (
    Claim("two-extremes-tight", claim_two_extremes_tight, "Two-Extremes alcanza 2n-3 en line3"),
    Claim("pair-independent-valid", claim_pair_independent_valid, "Pair-Independent es distribución y monótono"),
    Claim("pair-independent-bound", claim_pair_independent_bound, "Pair-Independent no supera 1+6σ"),
    Claim("sequential-dictator-tight", claim_sequential_dictator_tight, "Sequential Dictator alcanza 2(n-2)σ+1"),
    Claim("seven-thirds", claim_seven_thirds, "Minimax 7/3 en line3"),
    Claim("det-impossibility", claim_det_impossibility, "Ningún mecanismo determinista anónimo SP es acotado"),
    Claim("strategy-proof", claim_strategy_proof, "Suites de strategy-proofness"),
    Claim("line-lower-bounds", claim_line_lower_bounds, "Cotas inferiores en la recta"),
    Claim("random-dictator-unique", claim_random_dictator_unique, "Random Dictator es el único afín con distorsión finita"),
    Claim("opt-oracle", claim_opt_oracle, "opt coincide con la fuerza bruta"),
)}

# Mecanismo con el que se evalúa cada familia de perfiles por defecto
FAMILY_MECHANISMS: dict[str, str] = {
    "thm-two-extremes": "two-extremes",
    "thm-line3": "two-extremes",
    "thm-sd": "sequential-dictator",
    "thm-rd": "random-dictator",
}


def run_family(family_id: str, mechanism: str | None = None, **params) -> ClaimResult:
    """Evaluates every case of a named profile family under a mechanism."""
    family = build_family(family_id, **params)
    mechanism_id = mechanism or FAMILY_MECHANISMS.get(family_id, "pair-independent")
    mech = get_mechanism(mechanism_id)
    cases = []
    for case in family.cases:
        result = evaluate(mech(case.election), case.positions, case.election)
        cases.append({
            "label": case.label,
            "actions": list(case.election.actions),
            "positions": [list(p.coords) for p in case.positions],
            "ties": list(case.ties),
            "opt_pair": list(result["opt_pair"]),
            "opt": result["opt"],
            "expected_social_cost": result["expected_social_cost"],
            "ratio": result["ratio"],
        })
    return ClaimResult(
        claim_id=family_id, passed=True,
        expected="perfiles consistentes",
        observed=", ".join(f"{c['label']}: {_fmt(c['ratio'])}" for c in cases),
        params={**family.params, "mechanism": mechanism_id},
        details={"instance": family.candidates.name, "cases": cases},
    )


def run_claim(claim_id: str, **params) -> ClaimResult:
    """Runs a claim (or evaluates a named profile family) by id."""
    claim = CLAIMS.get(claim_id)
    if claim is None and claim_id not in FAMILIES:
        raise ConfigError(f"Error: claim '{claim_id}' desconocido. Disponibles: {', '.join(list_claims() + list(FAMILIES))}.")
    try:
        result = claim.run(**params) if claim else run_family(claim_id, **params)
    except TypeError as e:
        raise ConfigError(f"Error: parámetros inválidos para {claim_id}: {e}")
    logger.info(f"{claim_id}: {'OK' if result.passed else 'FALLO'} (esperado {result.expected}, observado {result.observed})")
    return result


def list_claims() -> list[str]:
    return list(CLAIMS)
