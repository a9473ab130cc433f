"""Command line interface for the Gaussian Brunn-Minkowski laboratory."""

import functools
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence

import click

from src.core.errors import GbmError

# Numerical modules are imported inside the commands so that ``cli`` stays
# cheap to import for help output and command registration.

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_USAGE = 2
EXIT_FILE = 3
EXIT_SCHEMA = 4
EXIT_DIMENSION = 5
EXIT_NUMERICAL = 6
EXIT_CONFIG = 7

EPILOG = """\b
Exit codes:
  0  success
  1  a theorem-backed check returned 'violated'
  2  usage error or invalid parameter value
  3  unreadable or missing file
  4  schema violation in a body, corpus or report document
  5  dimension mismatch
  6  numerical failure (convergence, sampling refusal, degenerate body)
  7  configuration error (e.g. sampling without a seed)

\b
Settings are read from GBM_* environment variables or .env; a YAML run file
given with --config fills in whatever neither the flags nor the environment set.
"""

PATH = click.Path(dir_okay=False, path_type=Path)


class CountType(click.ParamType):
    """Non-negative whole number, also written in float notation such as 1e6."""

    name = "count"

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> int:
        if isinstance(value, int) and not isinstance(value, bool):
            if value < 0:
                self.fail(f"{value!r} is not a non-negative whole number", param, ctx)
            return value
        try:
            number = float(str(value).strip())
        except ValueError:
            self.fail(f"{value!r} is not a number", param, ctx)
        if not math.isfinite(number) or number < 0 or not number.is_integer():
            self.fail(f"{value!r} is not a non-negative whole number", param, ctx)
        return int(number)


COUNT = CountType()


def _log_level(debug: bool) -> int:
    """Root log level from --debug, else GBM_DEBUG / GBM_LOG_LEVEL."""
    from pydantic import ValidationError

    from src.models.settings import Settings

    if debug:
        return logging.DEBUG
    try:
        settings = Settings()
    except ValidationError:
        # reported with exit code 7 once a command loads the settings
        return logging.INFO
    if settings.debug:
        return logging.DEBUG
    return logging.getLevelName(settings.log_level)


def exit_code_for(error: BaseException) -> int:
    """Map a laboratory exception to its documented exit code."""
    from src.core.errors import (
        ConfigurationError,
        ConvergenceError,
        DegenerateBodyError,
        DimensionMismatchError,
        SamplingError,
        SchemaError,
    )

    if isinstance(error, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(error, SchemaError):
        return EXIT_SCHEMA
    if isinstance(error, DimensionMismatchError):
        return EXIT_DIMENSION
    if isinstance(error, (ConvergenceError, SamplingError, DegenerateBodyError)):
        return EXIT_NUMERICAL
    if isinstance(error, OSError):
        return EXIT_FILE
    if isinstance(error, ValueError):
        return EXIT_USAGE
    return EXIT_NUMERICAL


def handle_errors(command: Callable) -> Callable:
    """Turn laboratory exceptions into an error log line and an exit code."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except click.ClickException:
            raise
        except (GbmError, ArithmeticError, OSError, ValueError, RuntimeError) as e:
            code = exit_code_for(e)
            logger.error(f"❌ {type(e).__name__}: {e}")
            ctx = click.get_current_context(silent=True)
            if ctx is not None and (ctx.find_root().obj or {}).get("debug"):
                logger.exception("Traceback")
            sys.exit(code)

    return wrapper


def _load_run(ctx: click.Context, **flags: Any):
    """Settings and the effective run configuration for one command."""
    from pydantic import ValidationError

    from src.core.errors import ConfigurationError
    from src.models.run_config import RunConfig
    from src.models.settings import Settings

    try:
        settings = Settings()
    except ValidationError as e:
        raise ConfigurationError(f"invalid GBM_* settings\n{e}") from e
    config_path = ctx.obj.get("config")
    base = RunConfig.from_yaml(config_path) if config_path else RunConfig()
    run = base.resolve(settings, **flags)
    if run.command is not None and run.command != ctx.info_name:
        logger.warning(f"Run file is meant for '{run.command}', running '{ctx.info_name}'")
    return settings, run


def _budget(run, required: bool):
    from src.models.estimates import SamplingBudget

    if run.seed is None:
        if required:
            run.require_seed()
        return None
    return SamplingBudget(samples=run.samples, seed=run.seed, workers=run.workers)


def _emit_json(report, out: Optional[Path]) -> None:
    from src.core.reporting import to_json, write_json

    if out is None:
        click.echo(to_json(report), nl=False)
        return
    write_json(report, out)
    logger.info(f"✅ Wrote {out}")


def _emit_csv(headers: Sequence[str], rows: List[List[Any]], out: Optional[Path]) -> None:
    from src.core.reporting import write_csv

    if out is None:
        write_csv(None, headers, rows, stream=click.get_text_stream("stdout"))
        return
    write_csv(out, headers, rows)
    logger.info(f"✅ Wrote {out}")


def _require(value: Any, flag: str) -> Any:
    if value is None:
        raise click.UsageError(f"{flag} is required (on the command line or in the run file)")
    return value


@click.group(epilog=EPILOG)
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.option("--config", "config_path", type=PATH, help="YAML run file")
@click.pass_context
def cli(ctx: click.Context, debug: bool, config_path: Optional[Path]) -> None:
    """Gaussian Brunn-Minkowski numerical laboratory.

    Estimates Gaussian measures of convex bodies, tabulates the refinement
    function sigma_n, solves the local Ornstein-Uhlenbeck problems and checks
    the inequalities on seeded corpora.
    """
    ctx.ensure_object(dict)
    log_level = _log_level(debug)
    ctx.obj["debug"] = log_level == logging.DEBUG
    ctx.obj["config"] = config_path
    logging.basicConfig(level=log_level, force=True)
    logger.debug("Debug mode enabled")


@cli.command()
@click.option("--body", type=PATH, help="Body document (JSON)")
@click.option("--n", type=int, help="Expected dimension")
@click.option("--seed", type=int, help="Monte Carlo seed")
@click.option("--samples", type=COUNT, help="Monte Carlo sample count")
@click.option("--workers", type=int, help="Worker threads")
@click.option("--moments/--no-moments", default=True, help="Also estimate second moments")
@click.option("--force-sampling", is_flag=True, help="Sample even when a closed form exists")
@click.option("--out", type=PATH, help="Output file (stdout if omitted)")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), help="Output format")
@click.pass_context
@handle_errors
def measure(
    ctx: click.Context,
    body: Optional[Path],
    n: Optional[int],
    seed: Optional[int],
    samples: Optional[int],
    workers: Optional[int],
    moments: bool,
    force_sampling: bool,
    out: Optional[Path],
    fmt: Optional[str],
) -> None:
    """Gaussian measure and second moments of one body."""
    from src.bodies.serialization import body_to_spec, load_body
    from src.core.errors import DimensionMismatchError
    from src.core.gaussmeasure import (
        closed_form,
        measure as measure_body,
        normalized_second_moment,
        second_moment,
    )
    from src.models.estimates import Quantity
    from src.models.reports import MeasureReport

    _, run = _load_run(
        ctx, body=body, n=n, seed=seed, samples=samples, workers=workers, out=out, format=fmt
    )
    shape = load_body(_require(run.body, "--body"))
    if run.n is not None and run.n != shape.dim:
        raise DimensionMismatchError(f"--n {run.n} but the body has dimension {shape.dim}")
    quantities = [Quantity.PROBABILITY] + ([Quantity.SECOND_MOMENT] if moments else [])
    exact = all(closed_form(shape, q) is not None for q in quantities)
    budget = _budget(run, required=force_sampling or not exact)
    logger.info(f"🔍 Measuring {shape.describe()}")

    report = MeasureReport(
        body=body_to_spec(shape),
        probability=measure_body(shape, budget, force_sampling),
        second_moment=second_moment(shape, budget, force_sampling) if moments else None,
        normalized_second_moment=(
            normalized_second_moment(shape, budget, force_sampling) if moments else None
        ),
    )
    if run.format == "csv":
        estimates = [
            e
            for e in (report.probability, report.second_moment, report.normalized_second_moment)
            if e is not None
        ]
        rows = [[e.quantity, e.value, e.std_error, e.method, e.samples, e.seed] for e in estimates]
        _emit_csv(("quantity", "value", "std_error", "method", "samples", "seed"), rows, run.out)
    else:
        _emit_json(report, run.out)


@cli.command()
@click.option("--n", type=int, help="Dimension")
@click.option("--nodes", type=COUNT, help="Radial nodes")
@click.option("--r-max", type=float, help="Largest radius (default from settings)")
@click.option("--margins", is_flag=True, help="Keep per-node convexity margins in the report")
@click.option("--refine", is_flag=True, help="Report the change against a doubled grid instead")
@click.option("--out", type=PATH, help="Output file (stdout if omitted)")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), help="json report or csv table")
@click.pass_context
@handle_errors
def sigma(
    ctx: click.Context,
    n: Optional[int],
    nodes: Optional[int],
    r_max: Optional[float],
    margins: bool,
    refine: bool,
    out: Optional[Path],
    fmt: Optional[str],
) -> None:
    """Tabulate sigma_n and certify the convexity of sigma_n(y^n)."""
    from src.core.sigma import SIGMA_CSV_HEADERS, build_sigma, refinement_study, sigma_report

    settings, run = _load_run(ctx, n=n, nodes=nodes, out=out, format=fmt)
    dim = _require(run.n, "--n")
    radius = r_max if r_max is not None else settings.sigma_r_max
    if refine:
        _emit_json(refinement_study(dim, run.nodes, radius), run.out)
        return

    logger.info(f"🔍 Building sigma_{dim} on {run.nodes} nodes")
    table = build_sigma(dim, radius, run.nodes)
    if run.format == "csv":
        _emit_csv(SIGMA_CSV_HEADERS, table.csv_rows(), run.out)
        return
    report = sigma_report(table, keep_margins=margins)
    status = "✅ certified" if report.certificate.passed else "❌ not certified"
    logger.info(f"{status}: min margin {report.certificate.min_margin:.3e}")
    _emit_json(report, run.out)


@cli.command()
@click.option("--body", type=PATH, help="Symmetric convex body in dimension 2 or 3 (JSON)")
@click.option(
    "--boundary",
    type=click.Choice(["zero", "cos", "quadratic"]),
    default="zero",
    help="Dirichlet data family",
)
@click.option("--h", type=float, help="Grid spacing")
@click.option(
    "--mode",
    type=click.Choice(["cut-cell", "nearest-node"]),
    default="cut-cell",
    help="Boundary treatment",
)
@click.option("--levels", type=int, default=0, help="Refinement ladder levels (0 for none)")
@click.option("--out", type=PATH, help="Output file (stdout if omitted)")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), help="json report or csv ladder")
@click.pass_context
@handle_errors
def pde(
    ctx: click.Context,
    body: Optional[Path],
    boundary: str,
    h: Optional[float],
    mode: str,
    levels: int,
    out: Optional[Path],
    fmt: Optional[str],
) -> None:
    """Solve Lu = 1 on a body and evaluate the Hessian functional."""
    from src.bodies.serialization import load_body
    from src.localpde import pde_report

    settings, run = _load_run(ctx, body=body, h=h, out=out, format=fmt)
    shape = load_body(_require(run.body, "--body"))
    logger.info(f"🔍 Solving on {shape.describe()} with h={run.h}")
    report = pde_report(
        shape,
        boundary,
        h=run.h,
        boundary_mode=mode,
        ladder_levels=levels,
        rtol=settings.cg_rtol,
        maxiter=settings.cg_maxiter,
    )
    bound_status = "✅" if report.functional.total >= report.theorem_bound else "❌"
    logger.info(
        f"{bound_status} functional {report.functional.total:.6f} against 1/n = {report.theorem_bound:.6f}"
    )
    if run.format == "csv":
        if report.ladder is None:
            raise click.UsageError("--format csv writes the refinement ladder; pass --levels 2 or more")
        rows = [
            [level.h, level.total, level.interior_only_total, level.unknowns]
            for level in report.ladder.levels
        ]
        _emit_csv(("h", "total", "interior_only_total", "unknowns"), rows, run.out)
        return
    _emit_json(report, run.out)


@cli.command()
@click.option("--n", type=click.Choice(["2", "3"]), default="2", help="Dimension")
@click.option(
    "--eps",
    "eps_values",
    type=float,
    multiple=True,
    help="Slab half-widths (repeatable; default 0.05 0.1 0.2)",
)
@click.option("--nodes-across", type=int, default=17, help="Grid nodes across the slab")
@click.option("--out", type=PATH, help="Output file (stdout if omitted)")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), help="json report or csv cases")
@click.pass_context
@handle_errors
def slab(
    ctx: click.Context,
    n: str,
    eps_values: Sequence[float],
    nodes_across: int,
    out: Optional[Path],
    fmt: Optional[str],
) -> None:
    """Thin-slab experiment: G(eps) against 1/(2n) + C eps^2."""
    from src.localpde import slab_experiment

    settings, run = _load_run(ctx, out=out, format=fmt)
    widths = list(eps_values) or [0.05, 0.1, 0.2]
    logger.info(f"🔍 Slab experiment in n={n} for eps={widths}")
    report = slab_experiment(
        int(n), widths, nodes_across, rtol=settings.cg_rtol, maxiter=settings.cg_maxiter
    )
    logger.info(f"✅ intercept {report.intercept:.6f}, slack {report.slack:.2e}")
    if run.format == "csv":
        headers = ("eps", "h", "g_value", "h_term", "v_term", "poincare_bound", "kl_lower_bound")
        rows = [
            [c.eps, c.h, c.g_value, c.h_term, c.v_term, c.poincare_bound, c.kl_lower_bound]
            for c in report.cases
        ]
        _emit_csv(headers, rows, run.out)
        return
    _emit_json(report, run.out)


@cli.command()
@click.option("--corpus", type=PATH, help="Corpus of check cases (JSON array)")
@click.option("--seed", type=int, help="Monte Carlo seed")
@click.option("--samples", type=COUNT, help="Monte Carlo sample count per case")
@click.option("--workers", type=int, help="Cases evaluated in parallel")
@click.option("--out", type=PATH, help="JSON lines file with every result")
@click.option("--summary", type=PATH, help="CSV summary file")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), help="Summary printed to stdout")
@click.pass_context
@handle_errors
def check(
    ctx: click.Context,
    corpus: Optional[Path],
    seed: Optional[int],
    samples: Optional[int],
    workers: Optional[int],
    out: Optional[Path],
    summary: Optional[Path],
    fmt: Optional[str],
) -> None:
    """Run the inequality checks over a corpus; exit 1 on a theorem-backed violation."""
    from src.checks.corpus import load_corpus
    from src.checks.interfaces import CheckContext
    from src.checks.runner import (
        CheckRunner,
        exit_code,
        summarize,
        write_results,
        write_summary_csv,
    )
    from src.checks.verdicts import VerdictPolicy

    settings, run = _load_run(
        ctx, corpus=corpus, seed=seed, samples=samples, workers=workers, out=out, format=fmt
    )
    cases = load_corpus(_require(run.corpus, "--corpus"))
    context = CheckContext(
        budget=_budget(run, required=True),
        policy=VerdictPolicy.from_settings(settings),
        sigma_nodes=settings.sigma_nodes if run.nodes is None else run.nodes,
        sigma_r_max=settings.sigma_r_max,
    )
    runner = CheckRunner(context, workers=run.workers)
    results = runner.run(cases)

    if run.out is not None:
        write_results(results, run.out)
        logger.info(f"✅ Wrote {len(results)} results to {run.out}")
    if summary is not None:
        write_summary_csv(results, summary)
        logger.info(f"✅ Wrote summary to {summary}")

    report = summarize(cases, results)
    if run.format == "csv":
        write_summary_csv(results, stream=click.get_text_stream("stdout"))
    else:
        _emit_json(report, None)

    code = exit_code(results)
    if code != EXIT_OK:
        for name in report.violated_theorem_checks:
            logger.error(f"❌ violated: {name}")
        sys.exit(code)
    logger.info(f"✅ No theorem-backed violations across {report.cases} cases")


@cli.command()
@click.option("--seed", type=int, required=True, help="Corpus seed")
@click.option("--count", type=COUNT, default=200, help="Number of cases")
@click.option("--dims", default="2,3,4", help="Comma-separated dimensions")
@click.option("--lambdas", default="0.25,0.5,0.75", help="Comma-separated weights")
@click.option("--out", type=PATH, required=True, help="Corpus file to write")
@handle_errors
def corpus(seed: int, count: int, dims: str, lambdas: str, out: Path) -> None:
    """Generate a seeded corpus of check cases."""
    from src.checks.corpus import generate_corpus, save_corpus

    try:
        dim_list = [int(d) for d in dims.split(",") if d.strip()]
        lambda_list = [float(v) for v in lambdas.split(",") if v.strip()]
    except ValueError as e:
        raise click.BadParameter(f"could not parse list: {e}") from e
    cases = generate_corpus(seed, count, dim_list, lambda_list)
    save_corpus(cases, out)
    click.echo(f"✅ Wrote {len(cases)} cases to {out}")


@cli.command()
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
    help="Directory for the JSON schemas",
)
@handle_errors
def schema(out: Path) -> None:
    """Write the JSON schema of every document and report."""
    import json

    from src.models.body_spec import BodySpec
    from src.models.check_case import CheckCase
    from src.models.estimates import MeasureEstimate
    from src.models.reports import (
        CheckResult,
        ConvergenceLadder,
        ConvexityCertificate,
        CorpusSummary,
        EqualityCaseReport,
        FunctionalReport,
        MeasureReport,
        PdeReport,
        RefinementReport,
        SigmaReport,
        SlabReport,
        XiProfileReport,
    )
    from src.models.run_config import RunConfig

    models = {
        "body": BodySpec,
        "check-case": CheckCase,
        "check-result": CheckResult,
        "convergence-ladder": ConvergenceLadder,
        "convexity-certificate": ConvexityCertificate,
        "corpus-summary": CorpusSummary,
        "equality-case-report": EqualityCaseReport,
        "functional-report": FunctionalReport,
        "measure-estimate": MeasureEstimate,
        "measure-report": MeasureReport,
        "pde-report": PdeReport,
        "refinement-report": RefinementReport,
        "run-config": RunConfig,
        "sigma-report": SigmaReport,
        "slab-report": SlabReport,
        "xi-profile-report": XiProfileReport,
    }
    out.mkdir(parents=True, exist_ok=True)
    for name, model in models.items():
        path = out / f"{name}.schema.json"
        path.write_text(
            json.dumps(model.model_json_schema(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    click.echo(f"✅ Wrote {len(models)} schemas to {out}")


@cli.command()
@click.pass_context
@handle_errors
def config(ctx: click.Context) -> None:
    """Display the effective settings and run configuration."""
    settings, run = _load_run(ctx)

    click.echo("\n📋 Laboratory Configuration\n")
    click.echo(f"Debug Mode: {settings.debug}")
    click.echo(f"Log Level: {settings.log_level}")

    click.echo("\n🎲 Sampling:")
    click.echo(f"  Seed: {run.seed if run.seed is not None else '❌ not set'}")
    click.echo(f"  Samples: {run.samples}")
    click.echo(f"  Workers: {run.workers}")

    click.echo("\n📐 Numerics:")
    click.echo(f"  Sigma nodes: {run.nodes} (r_max {settings.sigma_r_max})")
    click.echo(f"  PDE spacing: {run.h}")
    click.echo(f"  CG: rtol {settings.cg_rtol}, maxiter {settings.cg_maxiter}")
    click.echo(
        f"  Nets: {settings.net_size_2d} / {settings.net_size_3d} / {settings.net_size_high}"
    )

    click.echo("\n⚖️  Verdicts:")
    click.echo(
        f"  holds >= -{settings.holds_sigmas} sigma, violated <= -{settings.violated_sigmas} sigma"
    )
    click.echo(f"  exact tolerance: {settings.exact_tolerance}")

    if ctx.obj.get("config"):
        click.echo(f"\n📄 Run file: {ctx.obj['config']}")
        for key in ("command", "body", "corpus", "n", "out", "format"):
            value = getattr(run, key)
            if value is not None:
                click.echo(f"  {key}: {value}")


if __name__ == "__main__":
    cli()
