"""Statistical checks of Gaussian Brunn-Minkowski type inequalities."""

from src.checks.corpus import generate_corpus, load_corpus, save_corpus
from src.checks.inequalities import (
    PairMeasures,
    check_dim_bm,
    check_ehrhard,
    check_exponent_optimality,
    check_geomean_chain,
    check_log_bm,
    check_log_concavity,
    check_sigma_refinement,
    pair_measures,
)
from src.checks.interfaces import CaseState, CheckContext, InequalityCheck
from src.checks.lemmas import (
    check_ball_second_moment,
    check_dilate_lemma,
    check_equality_case,
    check_xi_profile,
)
from src.checks.poincare import OddCubic, check_b_variance, check_brascamp_lieb
from src.checks.runner import CheckRunner, exit_code, summarize
from src.checks.verdicts import DEFAULT_POLICY, VerdictPolicy, make_result

__all__ = [
    "CaseState",
    "CheckContext",
    "CheckRunner",
    "DEFAULT_POLICY",
    "InequalityCheck",
    "OddCubic",
    "PairMeasures",
    "VerdictPolicy",
    "check_b_variance",
    "check_ball_second_moment",
    "check_brascamp_lieb",
    "check_dilate_lemma",
    "check_dim_bm",
    "check_ehrhard",
    "check_equality_case",
    "check_exponent_optimality",
    "check_geomean_chain",
    "check_log_bm",
    "check_log_concavity",
    "check_sigma_refinement",
    "check_xi_profile",
    "exit_code",
    "generate_corpus",
    "load_corpus",
    "make_result",
    "pair_measures",
    "save_corpus",
    "summarize",
]
