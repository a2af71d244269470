from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class _Report(BaseModel):
    # Los ratios pueden ser infinitos (OPT = 0): en modo JSON se serializan como "Infinity"
    model_config = ConfigDict(ser_json_inf_nan="strings")


# --- Strategy-proofness ---
class SPViolation(_Report):
    actions: list[int]
    voter: int
    truthful_action: int
    deviation: int
    position: list[float]
    truthful_cost: float
    deviation_cost: float


class SPReport(_Report):
    mechanism: str
    instance: str
    max_n: int
    test_points: int
    evaluations: int = 0
    truncated: bool = False
    violation_count: int = 0
    violations: list[SPViolation] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


# --- Distorsión ---
class DistortionReport(_Report):
    """
    Best ratio found by the search and the profile achieving it. The value is a lower
    bound on the distortion of the mechanism on this candidate set.
    """
    mechanism: str
    instance: str
    n: int
    best_ratio: float
    witness_positions: list[list[float]]
    witness_actions: list[int]
    witness_opt_pair: tuple[int, ...]
    witness_expected_cost: float
    witness_opt: float
    search_budget: int
    exhaustive: bool = False
    seed: Optional[int] = None


# --- Imposibilidad determinista ---
class BranchCertificate(_Report):
    name: str
    x2_pair: tuple[int, int]
    closed: bool
    reason: str
    equations: list[str] = Field(default_factory=list)


class UnsatCertificate(_Report):
    r: float
    status: Literal["UNSAT", "SAT"]
    variables: list[str]
    constraints: list[str]
    branches: list[BranchCertificate]
    parity_equation: str
    derivation: list[str]
    z3_integer: str
    z3_relaxation: str
    relaxation_witness: dict[str, float]
    notes: list[str] = Field(default_factory=list)


# --- Verificadores analíticos ---
class MinimaxResult(_Report):
    grid_step: float
    value: float
    argmin: tuple[float, float, float]
    lp_value: float
    lp_argmin: tuple[float, float, float]
    grid_points: int


class SingleWinnerCheck(_Report):
    mechanism: str
    n: int
    m: int
    r: float
    affine: bool
    slope: Optional[float]
    intercepts: list[float]
    witness_found: bool
    witness_candidate: Optional[int] = None
    witness_ratio: Optional[float] = None
    passed: bool


class LineTwoElectionCheck(_Report):
    mechanism: str
    sigma: float
    n: int
    k: int
    ratio_gamma1: float
    ratio_gamma2: float
    bound: float
    proof_k: int
    proof_k_bound: float | None
    max_bound: float
    passed: bool


# --- Ejecución y claims ---
class RunResult(_Report):
    mechanism: str
    instance: str
    actions: list[int]
    positions: Optional[list[list[float]]] = None
    outcome: dict[str, float]
    social_costs: Optional[dict[str, float]] = None
    expected_social_cost: Optional[float] = None
    opt_pair: Optional[tuple[int, ...]] = None
    opt: Optional[float] = None
    ratio: Optional[float] = None
    consistent: Optional[bool] = None


class ClaimResult(_Report):
    claim_id: str
    passed: bool
    expected: str
    observed: str
    params: dict[str, Any] = Field(default_factory=dict)
    details: dict[str, Any] = Field(default_factory=dict)


class SweepRow(_Report):
    n: int
    sigma: float
    mechanism: str
    empirical_distortion: float
    analytic_upper_bound: Optional[float]
    analytic_lower_bound: Optional[float]
    runtime_ms: float
    seed: int


class ExperimentConfig(BaseModel):
    """Parámetros comunes a CLI y API; se validan antes de calcular nada."""
    command: Literal["run", "check-sp", "distortion", "reproduce", "sweep"]
    instance: Optional[str] = None
    instance_file: Optional[str] = None
    mechanism: Optional[str] = None
    n: Optional[int] = Field(default=None, ge=1)
    sigma: Optional[float] = None
    r: Optional[float] = None
    m: Optional[int] = Field(default=None, ge=2)
    seed: int = 42
    grid_step: Optional[float] = Field(default=None, gt=0)
    out: Optional[str] = None
    format: Literal["csv", "json"] = "json"
    actions: Optional[list[int]] = None
    positions: Optional[list[list[float]]] = None
    timing: bool = False
    claim_id: Optional[str] = None
    params: dict[str, Any] = Field(default_factory=dict)
    # Rangos de barrido (sweep)
    n_values: list[int] = Field(default_factory=list)
    sigma_values: list[float] = Field(default_factory=list)
    r_values: list[float] = Field(default_factory=list)
