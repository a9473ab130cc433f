"""The default checks registered with every CheckRunner."""

from typing import List

from src.checks.inequalities import (
    check_dim_bm,
    check_ehrhard,
    check_geomean_chain,
    check_log_bm,
    check_log_concavity,
    check_sigma_refinement,
)
from src.checks.interfaces import CaseState, CheckContext, InequalityCheck
from src.checks.lemmas import check_ball_second_moment, check_dilate_lemma
from src.checks.poincare import check_b_variance, check_brascamp_lieb
from src.models.reports import CheckResult


class DimBmCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "dim-bm"

    def is_applicable(self, state: CaseState) -> bool:
        return state.has_pair and state.symmetric_convex

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        case = state.case
        return [
            check_dim_bm(
                state.first,
                state.second,
                case.lam,
                delta=case.delta,
                case=case.name,
                policy=context.policy,
                measures=state.measures,
            )
        ]

    def get_priority(self) -> int:
        return 10


class LogConcavityCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "log-concavity"

    def is_applicable(self, state: CaseState) -> bool:
        return state.has_pair and state.first.is_convex and state.second.is_convex

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        return [
            check_log_concavity(
                state.first,
                state.second,
                state.case.lam,
                case=state.case.name,
                policy=context.policy,
                measures=state.measures,
            )
        ]

    def get_priority(self) -> int:
        return 20


class EhrhardCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "ehrhard"

    def is_applicable(self, state: CaseState) -> bool:
        return state.has_pair and state.first.is_convex and state.second.is_convex

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        return [
            check_ehrhard(
                state.first,
                state.second,
                state.case.lam,
                case=state.case.name,
                policy=context.policy,
                measures=state.measures,
            )
        ]

    def get_priority(self) -> int:
        return 20


class SigmaRefinementCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "sigma-refinement"

    def is_applicable(self, state: CaseState) -> bool:
        return state.has_pair and state.symmetric_convex

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        return [
            check_sigma_refinement(
                state.first,
                state.second,
                state.case.lam,
                context.sigma_table(state.first.dim),
                case=state.case.name,
                policy=context.policy,
                measures=state.measures,
            )
        ]

    def get_priority(self) -> int:
        return 30


class GeomeanChainCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "geomean-chain"

    def is_applicable(self, state: CaseState) -> bool:
        return state.has_pair and state.symmetric_convex and state.first.dim == 2

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        return [
            check_geomean_chain(
                state.first,
                state.second,
                state.case.lam,
                case=state.case.name,
                policy=context.policy,
                measures=state.measures,
            )
        ]

    def get_priority(self) -> int:
        return 40


class LogBmCheck(InequalityCheck):
    """Runs only when requested by name: geometric means always need sampling."""

    @property
    def name(self) -> str:
        return "log-bm"

    def is_applicable(self, state: CaseState) -> bool:
        return (
            self.name in state.case.checks
            and state.has_pair
            and state.symmetric_convex
            and state.budget is not None
        )

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        return [
            check_log_bm(
                state.first,
                state.second,
                state.case.lam,
                state.budget,
                case=state.case.name,
                policy=context.policy,
            )
        ]

    def get_priority(self) -> int:
        return 50


class BallSecondMomentCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "ball-second-moment"

    def is_applicable(self, state: CaseState) -> bool:
        return state.first.is_star_shaped and state.first.is_bounded

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        return [
            check_ball_second_moment(
                state.first, state.budget, case=state.case.name, policy=context.policy
            )
        ]

    def get_priority(self) -> int:
        return 60


class DilateLemmaCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "dilate-lemma"

    def is_applicable(self, state: CaseState) -> bool:
        return state.first.is_star_shaped and state.first.is_bounded

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        return check_dilate_lemma(
            state.first, budget=state.budget, case=state.case.name, policy=context.policy
        )

    def get_priority(self) -> int:
        return 60


class BVarianceCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "b-variance"

    def is_applicable(self, state: CaseState) -> bool:
        return (
            state.budget is not None
            and state.first.is_origin_symmetric
            and state.first.is_convex
            and state.first.is_bounded
        )

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        return [
            check_b_variance(
                state.first, state.budget, case=state.case.name, policy=context.policy
            )
        ]

    def get_priority(self) -> int:
        return 70


class BrascampLiebCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "brascamp-lieb"

    def is_applicable(self, state: CaseState) -> bool:
        return (
            state.budget is not None
            and state.first.is_origin_symmetric
            and state.first.is_convex
            and state.first.is_bounded
        )

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        seed = state.budget.seed or 0
        return check_brascamp_lieb(
            state.first, state.budget, seed=seed, case=state.case.name, policy=context.policy
        )

    def get_priority(self) -> int:
        return 70


DEFAULT_CHECKS = (
    DimBmCheck,
    LogConcavityCheck,
    EhrhardCheck,
    SigmaRefinementCheck,
    GeomeanChainCheck,
    LogBmCheck,
    BallSecondMomentCheck,
    DilateLemmaCheck,
    BVarianceCheck,
    BrascampLiebCheck,
)
