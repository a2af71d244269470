import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Iterable, Optional, TextIO

from app.classes.election import (
    Election,
    LocationProfile,
    evaluate,
    is_consistent,
    social_cost,
    truthful_election,
)
from app.classes.exceptions import ConfigError, ProfileError, ScvError
from app.classes.geometry import CandidateSet
from app.classes.mechanisms import Mechanism, get_mechanism
from app.classes.reports import (
    ClaimResult,
    DistortionReport,
    ExperimentConfig,
    RunResult,
    SPReport,
    SweepRow,
)
from app.config import Config
from app.helpers.format_number import format_float
from app.helpers.instance_io import load_instance
from app.services.bounds import analytic_bounds
from app.services.claims import run_claim
from app.services.distortion import distortion_search
from app.services.instances import build_instance
from app.services.strategy_proof import check_strategy_proof

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "n", "sigma", "mechanism", "empirical_distortion",
    "analytic_upper_bound", "analytic_lower_bound", "runtime_ms", "seed",
]


@dataclass(frozen=True)
class SweepPoint:
    """Un punto del barrido; se envía tal cual a los procesos del pool."""
    mechanism: str
    instance: str
    n: int
    sigma: Optional[float]
    r: Optional[float]
    m: Optional[int]
    seed: int
    grid_step: Optional[float]
    timing: bool
    params: dict[str, Any] = field(default_factory=dict, hash=False)


def _default_instance(mechanism_id: str, by_sigma: bool) -> str:
    if mechanism_id == "sequential-dictator":
        return "multi4"
    if mechanism_id == "two-extremes":
        return "line4" if by_sigma else "line3"
    return "line4" if by_sigma else "simplex"


def _make_mechanism(mechanism_id: str | None, params: dict[str, Any]) -> Mechanism:
    if not mechanism_id:
        raise ConfigError("Error: falta --mechanism.")
    try:
        return get_mechanism(mechanism_id, **params)
    except TypeError as e:
        raise ConfigError(f"Error: parámetros inválidos para {mechanism_id}: {e}")


def run_sweep_point(point: SweepPoint) -> SweepRow | None:
    """Evaluates one sweep point; infeasible points are logged and skipped (None)."""
    start = time.perf_counter()
    try:
        cs = build_instance(point.instance, sigma=point.sigma, r=point.r, m=point.m)
        report = distortion_search(_make_mechanism(point.mechanism, point.params), cs, point.n,
                                   grid_step=point.grid_step, seed=point.seed)
    except ScvError as e:
        logger.warning(f"Punto omitido (n={point.n}, sigma={point.sigma}, r={point.r}): {e}")
        return None
    upper, lower = analytic_bounds(point.mechanism, cs, point.n)
    return SweepRow(
        n=point.n,
        sigma=cs.sigma,
        mechanism=report.mechanism,
        empirical_distortion=report.best_ratio,
        analytic_upper_bound=upper,
        analytic_lower_bound=lower,
        runtime_ms=(time.perf_counter() - start) * 1000 if point.timing else 0.0,
        seed=point.seed,
    )


def write_sweep_csv(rows: Iterable[SweepRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([
            row.n, format_float(row.sigma), row.mechanism, format_float(row.empirical_distortion),
            format_float(row.analytic_upper_bound), format_float(row.analytic_lower_bound),
            format_float(row.runtime_ms), row.seed,
        ])


class ExperimentService:
    """
    Entry point shared by the CLI and the HTTP API: resolves the instance of an
    ExperimentConfig and runs the requested command.

    Methods:
        run(config) -> RunResult: mechanism output, costs, OPT and ratio
        check_sp(config) -> SPReport
        distortion(config) -> DistortionReport
        reproduce(config) -> ClaimResult
        sweep(config) -> list[SweepRow]
    """
    def __init__(self, max_workers: int | None = None):
        self.max_workers = max_workers or Config.MAX_WORKERS

    # --- Metodos privados ---
    def _instance(self, config: ExperimentConfig) -> tuple[CandidateSet, Election | None, LocationProfile | None]:
        if config.instance_file:
            return load_instance(config.instance_file, actions=config.actions or None)
        if config.instance:
            return build_instance(config.instance, sigma=config.sigma, r=config.r, m=config.m), None, None
        raise ConfigError("Error: indica --instance o --instance-file.")

    # --- Metodos publicos ---
    def run(self, config: ExperimentConfig) -> RunResult:
        cs, file_election, file_positions = self._instance(config)
        mech = _make_mechanism(config.mechanism, config.params)

        positions = LocationProfile.of(config.positions) if config.positions else file_positions
        if file_election is not None:
            election = file_election
        elif config.actions:
            election = Election(cs, tuple(config.actions))
        elif positions is not None:
            election = truthful_election(positions, cs)
        else:
            raise ConfigError("Error: se necesitan acciones (--actions) o posiciones (--positions).")

        d = mech(election)
        result = RunResult(
            mechanism=mech.name,
            instance=cs.name,
            actions=list(election.actions),
            outcome=d.as_dict(),
        )
        if positions is None:
            return result

        if not is_consistent(positions, election):
            raise ProfileError("Error: las posiciones no son consistentes con las acciones.")
        evaluation = evaluate(d, positions, election)
        committees = cs.pairs() if d.size == 2 else [(k,) for k in cs.indices()]
        result.positions = positions.as_array().tolist()
        result.social_costs = {",".join(map(str, c)): social_cost(c, positions, cs) for c in committees}
        result.expected_social_cost = evaluation["expected_social_cost"]
        result.opt_pair = evaluation["opt_pair"]
        result.opt = evaluation["opt"]
        result.ratio = evaluation["ratio"]
        result.consistent = True
        return result

    def check_sp(self, config: ExperimentConfig) -> SPReport:
        cs, _, _ = self._instance(config)
        return check_strategy_proof(
            _make_mechanism(config.mechanism, config.params), cs,
            max_n=config.n, grid_step=config.grid_step, seed=config.seed,
        )

    def distortion(self, config: ExperimentConfig) -> DistortionReport:
        if config.n is None:
            raise ConfigError("Error: la búsqueda de distorsión necesita --n.")
        cs, _, _ = self._instance(config)
        return distortion_search(
            _make_mechanism(config.mechanism, config.params), cs, config.n,
            grid_step=config.grid_step, seed=config.seed,
        )

    def reproduce(self, config: ExperimentConfig) -> ClaimResult:
        if not config.claim_id:
            raise ConfigError("Error: falta el id del claim.")
        return run_claim(config.claim_id, **config.params)

    def sweep(self, config: ExperimentConfig) -> list[SweepRow]:
        if not config.mechanism:
            raise ConfigError("Error: falta --mechanism.")
        n_values = config.n_values or ([config.n] if config.n is not None else [])
        sigma_values = config.sigma_values or ([config.sigma] if config.sigma is not None else [])
        r_values = config.r_values or ([config.r] if config.r is not None else [])
        instance = config.instance or _default_instance(config.mechanism, bool(sigma_values))

        # sigma y r describen instancias distintas: solo se barre el que use la instancia
        scales = [(s, None) for s in sigma_values] if instance == "line4" else [(None, r) for r in (r_values or [None])]
        points = [
            SweepPoint(config.mechanism, instance, int(n), sigma, r, config.m, config.seed, config.grid_step,
                       config.timing or Config.SWEEP_TIMING, dict(config.params))
            for n, (sigma, r) in product(n_values, scales)
        ]
        logger.info(f"Barrido de {len(points)} puntos con {self.max_workers} procesos")

        if self.max_workers > 1 and len(points) > 1:
            with ProcessPoolExecutor(max_workers=self.max_workers) as pool:
                results = list(pool.map(run_sweep_point, points))
        else:
            results = [run_sweep_point(p) for p in points]
        # map conserva el orden de los parámetros
        return [row for row in results if row is not None]
