"""Statistical verdicts for inequality checks."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.models.estimates import MeasureEstimate
from src.models.reports import CheckResult, Verdict
from src.models.settings import Settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerdictPolicy:
    """Holds iff sigmas >= -holds_sigmas, violated iff sigmas <= -violated_sigmas."""

    holds_sigmas: float = 3.0
    violated_sigmas: float = 5.0
    exact_tolerance: float = 1e-9

    @classmethod
    def from_settings(cls, settings: Settings) -> "VerdictPolicy":
        return cls(
            holds_sigmas=settings.holds_sigmas,
            violated_sigmas=settings.violated_sigmas,
            exact_tolerance=settings.exact_tolerance,
        )


DEFAULT_POLICY = VerdictPolicy()


def delta_std_error(gradient: Sequence[float], covariance: np.ndarray) -> float:
    """sqrt(g^T C g) for a smooth function of jointly estimated quantities."""
    g = np.asarray(gradient, dtype=float)
    if not np.all(np.isfinite(g)):
        g = np.where(np.diag(covariance) > 0.0, g, 0.0)
    variance = float(g @ covariance @ g)
    return math.sqrt(max(variance, 0.0))


def margin_sigmas(margin: float, std_error: float, policy: VerdictPolicy = DEFAULT_POLICY) -> float:
    if math.isnan(margin):
        return math.nan
    if std_error > 0.0:
        return margin / std_error
    if abs(margin) <= policy.exact_tolerance:
        return 0.0
    return math.copysign(math.inf, margin)


def verdict_for(sigmas: float, policy: VerdictPolicy = DEFAULT_POLICY) -> Verdict:
    if math.isnan(sigmas):
        return Verdict.INCONCLUSIVE
    if sigmas >= -policy.holds_sigmas:
        return Verdict.HOLDS
    if sigmas <= -policy.violated_sigmas:
        return Verdict.VIOLATED
    return Verdict.INCONCLUSIVE


def make_result(
    check: str,
    case: str,
    lhs: float,
    rhs: float,
    margin_std_error: float = 0.0,
    lhs_std_error: float = 0.0,
    rhs_std_error: float = 0.0,
    policy: VerdictPolicy = DEFAULT_POLICY,
    theorem_backed: bool = True,
    inputs: Optional[Dict[str, Any]] = None,
    provenance: Optional[List[MeasureEstimate]] = None,
    notes: Optional[List[str]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> CheckResult:
    """Build a CheckResult; ``lhs`` must be the side asserted to be larger."""
    # equal infinite sides compare as a zero margin
    margin = 0.0 if lhs == rhs else lhs - rhs
    sigmas = margin_sigmas(margin, margin_std_error, policy)
    verdict = verdict_for(sigmas, policy)
    if verdict == Verdict.VIOLATED and theorem_backed:
        logger.warning(f"❌ {check} violated on {case}: margin {margin:.3e} ({sigmas:.1f} sigma)")
    else:
        logger.debug(f"{check} on {case}: margin {margin:.3e} ({sigmas:.2f} sigma) -> {verdict.value}")
    return CheckResult(
        check=check,
        case=case,
        lhs=lhs,
        rhs=rhs,
        lhs_std_error=lhs_std_error,
        rhs_std_error=rhs_std_error,
        margin=margin,
        margin_std_error=margin_std_error,
        margin_sigmas=sigmas,
        verdict=verdict,
        theorem_backed=theorem_backed,
        inputs=inputs or {},
        provenance=provenance or [],
        notes=notes or [],
        extra=extra or {},
    )
