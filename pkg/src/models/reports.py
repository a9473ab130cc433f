"""Report models written by the laboratory.

Every report carries ``schema_version`` and serializes infinities as the JSON
constants ``Infinity`` / ``-Infinity`` so exact comparisons survive a round trip.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.models.body_spec import BodySpec
from src.models.estimates import SCHEMA_VERSION, MeasureEstimate


class ReportModel(BaseModel):
    """Base for every versioned report."""

    schema_version: str = Field(SCHEMA_VERSION, description="Report schema version")

    model_config = ConfigDict(use_enum_values=True, ser_json_inf_nan="constants")


class Verdict(str, Enum):
    """Outcome of a statistical inequality check."""

    HOLDS = "holds"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


# --- gaussmeasure -----------------------------------------------------------


class MeasureReport(ReportModel):
    """Measure and moments of one body."""

    body: BodySpec
    probability: MeasureEstimate
    second_moment: Optional[MeasureEstimate] = None
    normalized_second_moment: Optional[MeasureEstimate] = None


# --- sigma ------------------------------------------------------------------


class SigmaNormalization(BaseModel):
    """sigma(Psi_n(anchor_r)) = sigma_at_anchor, sigma'(Psi_n(anchor_r)) = slope_at_anchor."""

    anchor_r: float = 1.0
    sigma_at_anchor: float = 0.0
    slope_at_anchor: float = Field(1.0, gt=0.0)


class ConvexityCertificate(ReportModel):
    n: int
    nodes: int
    min_margin: float = Field(..., description="Smallest analytic margin over all nodes")
    min_interior_margin: float = Field(
        ..., description="Smallest analytic margin on r in [0.1, 3]"
    )
    min_convexity_defect: float = Field(
        ..., description="Smallest chord defect of y -> sigma(y^n)"
    )
    min_concavity_defect: float = Field(..., description="Smallest chord defect of tau")
    passed: bool
    margins: List[float] = Field(default_factory=list, description="Per-node margins")


class SigmaReport(ReportModel):
    n: int
    nodes: int
    r_min: float
    r_max: float
    normalization: SigmaNormalization
    ode_residual_max: float
    integral_residual_max: float
    small_y_limit_error: float = Field(
        ..., description="|y sigma''/sigma' + (n-1)/n| at the smallest nodes"
    )
    identity_deviation: Optional[float] = Field(
        None, description="n = 1 only: deviation from the closed integral identity"
    )
    log_fit_deviation: Optional[float] = Field(
        None, description="n = 1 only: distance from the best affine image of log y"
    )
    certificate: ConvexityCertificate


class RefinementReport(ReportModel):
    n: int
    nodes: int
    r_lo: float
    r_hi: float
    max_change: float


# --- localpde ---------------------------------------------------------------


class FunctionalReport(ReportModel):
    """Quadratures over gamma_K of a discrete solution, normalized by gamma(K)."""

    h: float
    dim: int
    hessian_term: float
    gradient_term: float
    total: float
    traceless_term: float
    laplacian_term: float
    drift_term: float
    constant: float
    hessian_minus_r_term: float
    variance_sum: float
    chain_bound: float
    ball_bound: float
    g_value: float
    interior_only_total: float
    boundary_adjacent_nodes: int
    mixed_fallback_nodes: int
    trace_identity_defect: float
    discretization_error: Optional[float] = None


class SolverStats(BaseModel):
    iterations: int
    residual_linf: float
    relative_residual: float
    evenness_defect: float
    unknowns: int


class ConvergenceLevel(BaseModel):
    h: float
    total: float
    interior_only_total: float
    unknowns: int


class ConvergenceLadder(ReportModel):
    levels: List[ConvergenceLevel]
    richardson_tau: List[float] = Field(
        default_factory=list, description="|T(h) - T_extrapolated| per consecutive pair"
    )
    observed_order: Optional[float] = None
    extrapolated_total: Optional[float] = None


class PdeReport(ReportModel):
    body: BodySpec
    boundary: str
    boundary_mode: str
    h: float
    functional: FunctionalReport
    solver: SolverStats
    theorem_bound: float
    ladder: Optional[ConvergenceLadder] = None


class SlabCase(BaseModel):
    eps: float
    h: float
    g_value: float
    h_term: float
    v_term: float
    dirichlet_energy: float
    poincare_bound: float
    kl_lower_bound: float
    poincare_holds: bool
    lower_bound_holds: bool


class SlabReport(ReportModel):
    n: int
    nodes_across: int
    cases: List[SlabCase]
    fitted_c: float
    intercept: float
    slack: float


# --- checks -----------------------------------------------------------------


class CheckResult(ReportModel):
    """One inequality verdict; ``lhs`` is always the side asserted to be larger."""

    check: str
    case: str
    lhs: float
    rhs: float
    lhs_std_error: float = 0.0
    rhs_std_error: float = 0.0
    margin: float
    margin_std_error: float = 0.0
    margin_sigmas: float
    verdict: Verdict
    theorem_backed: bool = True
    inputs: Dict[str, Any] = Field(default_factory=dict)
    provenance: List[MeasureEstimate] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    extra: Dict[str, Any] = Field(default_factory=dict)


class XiProfileReport(ReportModel):
    body: BodySpec
    radii: List[float]
    measures: List[float]
    ball_radii: List[float] = Field(
        ..., description="Psi_n^{-1}(Xi(s)) for each dilation s"
    )
    chord_defects: List[float]
    shape: str = Field(..., description="affine, concave or non-concave")


class EqualityCaseReport(ReportModel):
    body: BodySpec
    lam: float
    eps: List[float]
    margins: List[float]
    monotone: bool
    zero_at_zero: bool
    all_nonnegative: bool


class CorpusSummary(ReportModel):
    cases: int
    results: int
    verdicts: Dict[str, int]
    violated_theorem_checks: List[str]
