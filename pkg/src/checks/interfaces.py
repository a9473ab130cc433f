"""Interfaces for pluggable inequality checks."""

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional

from src.bodies.interfaces import Body
from src.bodies.serialization import body_from_spec
from src.checks.inequalities import PairMeasures, pair_measures
from src.checks.verdicts import DEFAULT_POLICY, VerdictPolicy
from src.core.sigma import SigmaTable, build_sigma
from src.models.check_case import CheckCase
from src.models.estimates import SamplingBudget
from src.models.reports import CheckResult


@dataclass
class CheckContext:
    """Everything a check needs besides its case."""

    budget: Optional[SamplingBudget] = None
    policy: VerdictPolicy = DEFAULT_POLICY
    sigma_nodes: int = 4096
    sigma_r_max: float = 6.0
    _tables: Dict[int, SigmaTable] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def sigma_table(self, n: int) -> SigmaTable:
        """sigma_n, built once per dimension and shared across worker threads."""
        with self._lock:
            if n not in self._tables:
                self._tables[n] = build_sigma(n, self.sigma_r_max, self.sigma_nodes)
            return self._tables[n]

    def budget_for(self, case: CheckCase) -> Optional[SamplingBudget]:
        if self.budget is None:
            if case.samples is None:
                return None
            return SamplingBudget(samples=case.samples, seed=case.seed)
        update: Dict[str, int] = {}
        if case.samples is not None:
            update["samples"] = case.samples
        if case.seed is not None:
            update["seed"] = case.seed
        return self.budget.model_copy(update=update) if update else self.budget


class CaseState:
    """A case with its bodies and budget; pair measures are estimated once and shared."""

    def __init__(self, case: CheckCase, budget: Optional[SamplingBudget]):
        self.case = case
        self.budget = budget
        self.first: Body = body_from_spec(case.first)
        self.second: Optional[Body] = (
            body_from_spec(case.second) if case.second is not None else None
        )

    @property
    def has_pair(self) -> bool:
        return self.second is not None

    @property
    def symmetric_convex(self) -> bool:
        bodies = [self.first] + ([self.second] if self.second is not None else [])
        return all(b.is_origin_symmetric and b.is_convex for b in bodies)

    @cached_property
    def measures(self) -> PairMeasures:
        if self.second is None:
            raise ValueError(f"case {self.case.name} has no second body")
        return pair_measures(self.first, self.second, self.case.lam, self.budget)


class InequalityCheck(ABC):
    """One named inequality evaluated on check cases."""

    @property
    @abstractmethod
    def name(self) -> str:
        """A unique check name, e.g. 'dim-bm'."""
        pass

    @abstractmethod
    def is_applicable(self, state: CaseState) -> bool:
        """Whether the case carries what this check needs."""
        pass

    @abstractmethod
    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        pass

    def get_priority(self) -> int:
        """Lower numbers run first within a case (default: 100)."""
        return 100
