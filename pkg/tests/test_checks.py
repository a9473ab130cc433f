"""Tests for inequality checks, verdicts and the check runner."""

import io
import math
from typing import List

import numpy as np
import pytest

from src.bodies import ball, box, halfspace, slab
from src.bodies.serialization import body_to_spec
from src.checks import CheckRunner, exit_code, summarize
from src.checks.inequalities import (
    check_dim_bm,
    check_ehrhard,
    check_exponent_optimality,
    check_geomean_chain,
    check_log_concavity,
    check_sigma_refinement,
)
from src.checks.interfaces import CaseState, CheckContext, InequalityCheck
from src.checks.lemmas import (
    check_ball_second_moment,
    check_dilate_lemma,
    check_equality_case,
    check_xi_profile,
)
from src.checks.poincare import OddCubic, check_b_variance, check_brascamp_lieb
from src.checks.runner import SUMMARY_HEADERS, write_summary_csv
from src.checks.verdicts import (
    VerdictPolicy,
    delta_std_error,
    make_result,
    margin_sigmas,
    verdict_for,
)
from src.core.errors import SchemaError
from src.core.sigma import build_sigma
from src.models.check_case import CheckCase
from src.models.reports import CheckResult, Verdict


@pytest.fixture(scope="module")
def planar_sigma():
    return build_sigma(2, 6.0, 1000)


def make_case(name, first, second=None, **kwargs) -> CheckCase:
    return CheckCase(
        name=name,
        first=body_to_spec(first),
        second=body_to_spec(second) if second is not None else None,
        **kwargs,
    )


class TestVerdicts:
    def test_margin_sigmas(self):
        assert margin_sigmas(-1.0, 0.25) == -4.0
        assert margin_sigmas(0.5, 0.0) == math.inf
        assert margin_sigmas(-0.5, 0.0) == -math.inf
        assert margin_sigmas(-1e-12, 0.0) == 0.0

    def test_verdict_bands(self):
        assert verdict_for(-2.0) == Verdict.HOLDS
        assert verdict_for(-4.0) == Verdict.INCONCLUSIVE
        assert verdict_for(-6.0) == Verdict.VIOLATED
        assert verdict_for(math.nan) == Verdict.INCONCLUSIVE
        strict = VerdictPolicy(holds_sigmas=1.0, violated_sigmas=2.0)
        assert verdict_for(-2.5, strict) == Verdict.VIOLATED

    def test_delta_method_standard_error(self):
        covariance = np.diag([1.0, 4.0])
        assert delta_std_error([1.0, -1.0], covariance) == pytest.approx(math.sqrt(5.0))
        # infinite slopes on exactly known quantities drop out
        assert delta_std_error([math.inf, 1.0], np.diag([0.0, 1.0])) == pytest.approx(1.0)

    def test_make_result_orients_the_margin(self):
        result = make_result("demo", "case", 2.0, 1.5, margin_std_error=0.1)
        assert result.margin == pytest.approx(0.5)
        assert result.margin_sigmas == pytest.approx(5.0)
        assert result.verdict == Verdict.HOLDS


class TestInequalities:
    def test_dimensional_inequality_on_balls(self):
        result = check_dim_bm(ball(2, 1.0), ball(2, 2.0), 0.5)
        assert result.verdict == Verdict.HOLDS
        assert result.margin > 0.0
        assert result.margin_std_error == 0.0
        assert result.theorem_backed is True
        assert len(result.provenance) == 3

    def test_identical_bodies_give_zero_margins(self, planar_sigma):
        square = box(1.0, 1.0)
        for result in (
            check_dim_bm(square, square, 0.3),
            check_ehrhard(square, square, 0.3),
            check_log_concavity(square, square, 0.3),
            check_geomean_chain(square, square, 0.3),
            check_sigma_refinement(square, square, 0.3, planar_sigma),
        ):
            assert abs(result.margin) <= 1e-12
            assert result.verdict == Verdict.HOLDS

    def test_geomean_chain_with_full_measure(self):
        """Bodies of measure one in floating point map to an infinite ball radius."""
        wide = check_geomean_chain(slab(2, 10.0), slab(2, 10.0), 0.5)
        assert wide.lhs == math.inf
        assert wide.rhs == math.inf
        assert wide.margin == 0.0
        assert wide.verdict == Verdict.HOLDS

        large = check_geomean_chain(ball(2, 40.0), ball(2, 1.0), 0.5)
        assert large.lhs == math.inf
        assert math.isfinite(large.rhs)
        assert large.verdict == Verdict.HOLDS

    def test_exponents_above_one_over_n_fail_on_small_boxes(self):
        result = check_exponent_optimality(2, 2.0)
        assert result.check == "exponent-optimality"
        assert result.verdict == Verdict.VIOLATED
        assert result.theorem_backed is False
        assert result.extra["expected"] == "violated"
        with pytest.raises(ValueError):
            check_exponent_optimality(2, 1.0)

    def test_ehrhard_is_an_equality_on_parallel_halfspaces(self):
        result = check_ehrhard(halfspace((1.0, 0.0), 0.5), halfspace((1.0, 0.0), -0.3), 0.5)
        assert abs(result.margin) <= 1e-9
        assert result.verdict == Verdict.HOLDS

    def test_log_concavity_on_halfspaces(self):
        result = check_log_concavity(halfspace((0.0, 1.0), 1.0), halfspace((0.0, 1.0), -1.0), 0.5)
        assert result.margin > 0.0
        assert result.theorem_backed is True

    def test_sigma_verdicts_ignore_affine_normalization(self, planar_sigma):
        first, second = box(0.5, 2.0), box(1.5, 0.7)
        plain = check_sigma_refinement(first, second, 0.4, planar_sigma)
        scaled = check_sigma_refinement(first, second, 0.4, planar_sigma.rescaled(3.0, -2.0))
        assert plain.verdict == scaled.verdict
        assert scaled.margin == pytest.approx(3.0 * plain.margin, abs=1e-12)
        assert plain.extra["chain"]["implication_holds"] is True

    def test_sigma_table_must_match_the_dimension(self, planar_sigma):
        with pytest.raises(ValueError):
            check_sigma_refinement(ball(3, 1.0), ball(3, 2.0), 0.5, planar_sigma)


class TestLemmas:
    def test_ball_second_moment_comparison(self):
        assert check_ball_second_moment(ball(3, 1.2)).verdict == Verdict.HOLDS
        result = check_ball_second_moment(box(1.0, 0.5))
        assert result.margin > 0.0
        assert result.verdict == Verdict.HOLDS

    def test_dilation_lemma(self):
        results = check_dilate_lemma(box(1.0, 2.0))
        assert [r.case for r in results] == [
            "dilate-lemma-t0.25",
            "dilate-lemma-t0.5",
            "dilate-lemma-t0.75",
            "dilate-lemma-t1",
        ]
        assert all(r.verdict == Verdict.HOLDS for r in results)
        assert abs(results[-1].margin) <= 1e-9
        with pytest.raises(ValueError):
            check_dilate_lemma(box(1.0, 2.0), t_grid=[1.5])

    def test_equality_case_margins_grow_from_zero(self):
        report = check_equality_case(ball(2, 2.0))
        assert report.zero_at_zero
        assert report.monotone
        assert report.all_nonnegative
        assert report.margins[-1] > 0.0

    def test_xi_profile_of_a_ball_is_affine(self):
        report = check_xi_profile(ball(2, 1.0), [0.5, 1.0, 1.5, 2.0])
        assert report.shape == "affine"
        np.testing.assert_allclose(report.ball_radii, report.radii, atol=1e-9)


class TestVariance:
    def test_odd_cubic_gradient_matches_finite_differences(self):
        f = OddCubic.random(np.random.default_rng(3), 3)
        points = np.random.default_rng(4).standard_normal((5, 3))
        step = 1e-6
        numeric = np.stack(
            [
                (f(points + step * e) - f(points - step * e)) / (2.0 * step)
                for e in np.eye(3)
            ],
            axis=1,
        )
        np.testing.assert_allclose(f.gradient(points), numeric, rtol=1e-6, atol=1e-6)
        np.testing.assert_allclose(f(-points), -f(points))

    def test_variance_inequalities_hold_on_a_box(self, small_budget):
        square = box(1.0, 1.5)
        assert check_b_variance(square, small_budget).verdict == Verdict.HOLDS
        results = check_brascamp_lieb(square, small_budget, count=2, seed=5)
        assert [r.case for r in results] == ["brascamp-lieb-f0", "brascamp-lieb-f1"]
        assert all(r.verdict == Verdict.HOLDS for r in results)


class ExplodingCheck(InequalityCheck):
    @property
    def name(self) -> str:
        return "exploding"

    def is_applicable(self, state: CaseState) -> bool:
        return True

    def run(self, state: CaseState, context: CheckContext) -> List[CheckResult]:
        raise ValueError("boom")

    def get_priority(self) -> int:
        return 5


@pytest.fixture
def runner():
    return CheckRunner(CheckContext(sigma_nodes=1000))


@pytest.fixture
def small_corpus():
    return [
        make_case(
            "balls",
            ball(2, 1.0),
            ball(2, 2.0),
            checks=["dim-bm", "log-concavity", "ehrhard", "ball-second-moment"],
        ),
        make_case("same-box", box(1.0, 0.5), box(1.0, 0.5), lam=0.25),
        make_case(
            "halfspaces",
            halfspace((1.0, 0.0), 0.5),
            halfspace((1.0, 0.0), -0.3),
            checks=["ehrhard", "log-concavity"],
        ),
    ]


class TestCheckRunner:
    def test_default_registry(self, runner):
        checks = runner.list_checks()
        assert len(checks) == 10
        priorities = [c["priority"] for c in checks]
        assert priorities == sorted(priorities)
        assert checks[0]["name"] == "dim-bm"

    def test_register_replace_and_unregister(self, runner):
        runner.register_check(ExplodingCheck())
        assert runner.list_checks()[0]["name"] == "exploding"
        runner.register_check(ExplodingCheck())
        assert len(runner.list_checks()) == 11
        assert runner.unregister_check("exploding") is True
        assert runner.unregister_check("exploding") is False
        assert runner.get_check("exploding") is None
        with pytest.raises(ValueError):
            runner.register_check("dim-bm")

    def test_run_on_exact_cases(self, runner, small_corpus):
        results = runner.run(small_corpus)
        keys = [(r.case, r.check) for r in results]
        assert keys == sorted(keys)
        assert sum(r.case == "balls" for r in results) == 4
        assert sum(r.case == "halfspaces" for r in results) == 2
        same_box = {r.check for r in results if r.case == "same-box"}
        assert {"dim-bm", "sigma-refinement", "geomean-chain", "dilate-lemma"} <= same_box
        assert "b-variance" not in same_box
        assert all(r.verdict == Verdict.HOLDS for r in results)

        summary = summarize(small_corpus, results)
        assert summary.cases == 3
        assert summary.verdicts == {"holds": len(results), "violated": 0, "inconclusive": 0}
        assert exit_code(results) == 0

    def test_worker_count_does_not_change_results(self, small_corpus):
        serial = CheckRunner(CheckContext(sigma_nodes=1000)).run(small_corpus)
        threaded = CheckRunner(CheckContext(sigma_nodes=1000), workers=3).run(small_corpus)
        assert [(r.case, r.check, r.margin) for r in serial] == [
            (r.case, r.check, r.margin) for r in threaded
        ]

    def test_capped_slabs_count_as_bounded(self, runner):
        results = runner.run(
            [
                make_case(
                    "capped-slab",
                    slab(2, 0.5, cap=1.5),
                    checks=["ball-second-moment", "dilate-lemma"],
                ),
                make_case("open-slab", slab(2, 0.5), checks=["ball-second-moment"]),
            ]
        )
        capped = [r for r in results if r.case.startswith("capped-slab")]
        assert {r.check for r in capped} == {"ball-second-moment", "dilate-lemma"}
        assert len(capped) == 5
        assert all(r.verdict == Verdict.HOLDS for r in capped)
        assert all(r.notes == [] for r in capped)
        (open_result,) = [r for r in results if r.case == "open-slab"]
        assert open_result.notes == ["ball-second-moment is not applicable"]

    def test_failures_become_inconclusive(self, runner):
        runner.register_check(ExplodingCheck())
        cases = [
            make_case("explodes", ball(2, 1.0), ball(2, 2.0), checks=["exploding"]),
            make_case("no-budget", box(1.0, 1.0), checks=["b-variance"]),
        ]
        results = runner.run(cases)
        assert [r.verdict for r in results] == [Verdict.INCONCLUSIVE, Verdict.INCONCLUSIVE]
        assert results[0].notes == ["ValueError: boom"]
        assert results[1].notes == ["b-variance is not applicable"]
        assert all(r.theorem_backed is False for r in results)
        assert exit_code(results) == 0

    def test_unknown_check_names_are_schema_errors(self, runner):
        with pytest.raises(SchemaError):
            runner.run([make_case("typo", ball(2, 1.0), ball(2, 2.0), checks=["dim-bn"])])

    def test_theorem_backed_violations_set_the_exit_code(self):
        violated = make_result("dim-bm", "bad", 0.0, 1.0)
        expected = make_result("dim-bm", "fine", 0.0, 1.0, theorem_backed=False)
        assert exit_code([expected]) == 0
        assert exit_code([expected, violated]) == 1
        assert summarize([], [violated]).violated_theorem_checks == ["bad:dim-bm"]

    def test_summary_csv(self, runner, small_corpus):
        stream = io.StringIO()
        write_summary_csv(runner.run(small_corpus[:1]), stream=stream)
        lines = stream.getvalue().splitlines()
        assert lines[0] == ",".join(SUMMARY_HEADERS)
        assert len(lines) == 5
        assert lines[1].startswith("balls,ball-second-moment,")
