"""Runs registered checks over corpora of check cases."""

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Union

from src.checks.builtin import DEFAULT_CHECKS
from src.checks.interfaces import CaseState, CheckContext, InequalityCheck
from src.checks.verdicts import make_result
from src.core.errors import GbmError, SchemaError
from src.core.reporting import write_csv, write_jsonl
from src.models.check_case import CheckCase
from src.models.reports import CheckResult, CorpusSummary, Verdict

logger = logging.getLogger(__name__)

SUMMARY_HEADERS = ("name", "check", "lhs", "rhs", "margin", "sigmas", "verdict")


class CheckRunner:
    """Keeps a registry of named checks and evaluates them case by case."""

    def __init__(self, context: Optional[CheckContext] = None, workers: int = 1):
        self.context = context or CheckContext()
        self.workers = max(1, int(workers))
        self.checks: List[InequalityCheck] = []
        self._register_default_checks()

    def _register_default_checks(self) -> None:
        for check_class in DEFAULT_CHECKS:
            self.register_check(check_class())

    def register_check(self, check: InequalityCheck) -> None:
        """Register a check, replacing any check with the same name."""
        if not isinstance(check, InequalityCheck):
            raise ValueError("Check must implement the InequalityCheck interface")

        existing = next((c for c in self.checks if c.name == check.name), None)
        if existing:
            logger.warning(f"Replacing existing check: {check.name}")
            self.checks.remove(existing)

        self.checks.append(check)
        self.checks.sort(key=lambda c: c.get_priority())
        logger.debug(f"Registered check: {check.name} (priority: {check.get_priority()})")

    def unregister_check(self, name: str) -> bool:
        for check in self.checks:
            if check.name == name:
                self.checks.remove(check)
                logger.info(f"Unregistered check: {name}")
                return True

        logger.warning(f"Check not found for unregistration: {name}")
        return False

    def list_checks(self) -> List[Dict[str, Any]]:
        return [
            {
                "name": check.name,
                "priority": check.get_priority(),
                "class_name": check.__class__.__name__,
            }
            for check in self.checks
        ]

    def get_check(self, name: str) -> Optional[InequalityCheck]:
        return next((c for c in self.checks if c.name == name), None)

    def validate_cases(self, cases: Sequence[CheckCase]) -> None:
        """Unknown check names in a case are a schema error."""
        known = {check.name for check in self.checks}
        for case in cases:
            unknown = sorted(set(case.checks) - known)
            if unknown:
                raise SchemaError(f"case {case.name}: unknown checks {unknown}")

    def _selected(self, state: CaseState) -> List[InequalityCheck]:
        if not state.case.checks:
            return [check for check in self.checks if check.is_applicable(state)]
        return [check for check in self.checks if check.name in state.case.checks]

    def run_case(self, case: CheckCase) -> List[CheckResult]:
        """All selected checks on one case; a failing check yields an inconclusive result."""
        state = CaseState(case, self.context.budget_for(case))
        results: List[CheckResult] = []
        for check in self._selected(state):
            if not check.is_applicable(state):
                results.append(
                    self._inconclusive(check.name, case, f"{check.name} is not applicable")
                )
                continue
            try:
                results.extend(check.run(state, self.context))
            except (GbmError, ValueError) as e:
                logger.warning(f"⚠️ {check.name} failed on {case.name}: {e}")
                results.append(self._inconclusive(check.name, case, f"{type(e).__name__}: {e}"))
        return results

    @staticmethod
    def _inconclusive(check: str, case: CheckCase, note: str) -> CheckResult:
        return make_result(
            check,
            case.name,
            math.nan,
            math.nan,
            theorem_backed=False,
            inputs={"case": case.name},
            notes=[note],
        )

    def run(self, cases: Sequence[CheckCase]) -> List[CheckResult]:
        """Evaluate every case; results are sorted by (case name, check name)."""
        self.validate_cases(cases)
        logger.info(f"🔍 Running {len(self.checks)} checks over {len(cases)} cases")
        if self.workers == 1 or len(cases) <= 1:
            batches = [self.run_case(case) for case in cases]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                batches = list(pool.map(self.run_case, cases))
        results = [result for batch in batches for result in batch]
        results.sort(key=lambda r: (r.case, r.check))
        logger.info(f"✅ Finished {len(results)} check results")
        return results


def summarize(cases: Sequence[CheckCase], results: Sequence[CheckResult]) -> CorpusSummary:
    counts = Counter(_verdict_value(result) for result in results)
    verdicts = {verdict.value: counts.get(verdict.value, 0) for verdict in Verdict}
    return CorpusSummary(
        cases=len(cases),
        results=len(results),
        verdicts=verdicts,
        violated_theorem_checks=violated_theorem_checks(results),
    )


def _verdict_value(result: CheckResult) -> str:
    verdict = result.verdict
    return verdict.value if isinstance(verdict, Verdict) else str(verdict)


def violated_theorem_checks(results: Iterable[CheckResult]) -> List[str]:
    return [
        f"{result.case}:{result.check}"
        for result in results
        if result.theorem_backed and _verdict_value(result) == Verdict.VIOLATED.value
    ]


def exit_code(results: Iterable[CheckResult]) -> int:
    """1 iff some theorem-backed check was violated."""
    return 1 if violated_theorem_checks(results) else 0


def summary_rows(results: Iterable[CheckResult]) -> List[List[Any]]:
    return [
        [
            result.case,
            result.check,
            result.lhs,
            result.rhs,
            result.margin,
            result.margin_sigmas,
            _verdict_value(result),
        ]
        for result in results
    ]


def write_results(results: Sequence[CheckResult], path: Union[str, Path]) -> Path:
    return write_jsonl(results, path)


def write_summary_csv(
    results: Sequence[CheckResult],
    path: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
) -> Optional[Path]:
    return write_csv(path or "summary.csv", SUMMARY_HEADERS, summary_rows(results), stream=stream)
