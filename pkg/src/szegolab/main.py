#!/usr/bin/env python
"""
szegolab command line.

Every subcommand resolves its configuration (packaged profile, user YAML,
command-line overrides), echoes it to <out>/resolved_config.yaml and writes
its tables and reports next to it. Exit codes: 0 success, 1 constraint
violation, 2 numeric failure, 64 usage error.
"""

import json
import sys
from pathlib import Path
from typing import Annotated, Any, Dict, List, Optional

import click
import numpy as np
import pandas as pd
import structlog
import typer
import yaml
from pydantic import BaseModel, ValidationError

from .asym_coeffs import ga, gd, predicted_w1, w0
from .config import load_experiment_config, settings
from .domains import build_domain
from .exceptions import ConstraintError, LabError
from .hs_calculus import DenseOperator, hs_apply_function
from .logs import setup_logging
from .matrix_io import read_matrix, write_matrix
from .models import (
    BoundSweepConfig,
    ClosureConfig,
    CoeffsReport,
    CrossGrowthConfig,
    ErrorReport,
    HSSuiteConfig,
    JumpConfig,
    QuadratureSpec,
    RunConfig,
    SplitConfig,
    SweepResult,
    SzegoConfig,
)
from .qa_extension import build_extension, cone_grid, omega_profile
from .registry import function_from_label, symbol_from_label
from .services.experiment_service import ExperimentService
from .services.sweep_service import SweepService

logger = structlog.get_logger(__name__)

EXIT_USAGE = 64

app = typer.Typer(
    name="szegolab",
    help="Helffer-Sjostrand calculus, Schatten quasi-norm bounds and Szego asymptotics",
    no_args_is_help=True,
    add_completion=False,
)

ConfigOption = Annotated[
    Optional[Path],
    typer.Option("--config", exists=True, dir_okay=False, help="YAML file merged over the packaged profile"),
]
OutOption = Annotated[Optional[Path], typer.Option("--out", help="Output directory")]
ThreadsOption = Annotated[Optional[int], typer.Option("--threads", min=1, help="Worker threads")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Base seed of random instances")]


# Configuration resolution

def _fields(raw: Dict[str, Any]) -> Dict[str, Any]:
    """Flatten the YAML sections into the fields of the experiment models"""
    fields = {k: v for k, v in raw.items() if k not in ("run", "domains", "sweep")}
    domains = raw.get("domains") or {}
    if "lambda" in domains:
        fields["lambda_domain"] = domains["lambda"]
    if "omega" in domains:
        fields["omega_domain"] = domains["omega"]
    fields.update(raw.get("sweep") or {})
    return fields


def _with_overrides(fields: Dict[str, Any], overrides: Dict[str, float]) -> Dict[str, Any]:
    """Route run.tolerance_overrides into the experiment fields; target_tolerance goes to the quadrature"""
    fields = dict(fields)
    for key, value in overrides.items():
        if key == "target_tolerance":
            fields["quadrature"] = dict(fields.get("quadrature") or {}, target_tolerance=value)
        else:
            fields[key] = value
    return fields


def _validated(model_cls, fields: Dict[str, Any]):
    try:
        return model_cls.model_validate(fields)
    except ValidationError as e:
        raise ConstraintError(f"invalid {model_cls.__name__}: {e}") from e


def _resolve(subcommand: str, config_path: Optional[Path], out: Optional[Path], threads: Optional[int],
             seed: Optional[int]) -> tuple:
    raw = load_experiment_config(subcommand, config_path)
    run_section = raw.get("run") or {}
    run = _validated(RunConfig, {
        "subcommand": subcommand,
        "config_path": config_path,
        "seed": seed if seed is not None else run_section.get("seed", settings.seed),
        "thread_count": threads or run_section.get("threads", settings.thread_count),
        "output_dir": out or run_section.get("output_dir", settings.output_dir),
        "tolerance_overrides": run_section.get("tolerance_overrides", {}),
    })
    run.output_dir.mkdir(parents=True, exist_ok=True)
    setup_logging(settings, run.output_dir / "szegolab.log")
    if run.tolerance_overrides:
        logger.info("tolerance overrides", subcommand=subcommand, **run.tolerance_overrides)
    return run, _with_overrides(_fields(raw), run.tolerance_overrides)


def _echo_config(run: RunConfig, experiment: Optional[BaseModel] = None, extra: Optional[Dict] = None) -> None:
    resolved = {"run": run.model_dump(mode="json")}
    if experiment is not None:
        resolved[run.subcommand] = experiment.model_dump(mode="json")
    if extra:
        resolved.setdefault(run.subcommand, {}).update(extra)
    with open(run.output_dir / "resolved_config.yaml", "w") as f:
        yaml.safe_dump(resolved, f, sort_keys=True)


def _write_json(path: Path, model: BaseModel) -> None:
    path.write_text(model.model_dump_json(indent=2))


def _write_table(run: RunConfig, frame: pd.DataFrame) -> None:
    frame.to_csv(run.output_dir / f"{run.subcommand}.csv", index=False)
    frame.to_csv(run.output_dir / f"{run.subcommand}.tsv", sep="\t", index=False)


def _guarded(run: RunConfig, action) -> int:
    """Run one subcommand body, mapping library errors to exit codes and an error report"""
    try:
        action()
    except LabError as e:
        logger.error("run failed", subcommand=run.subcommand, error=str(e), kind=type(e).__name__)
        _write_json(run.output_dir / "error.json",
                    ErrorReport(error=type(e).__name__, exit_code=e.exit_code, detail=str(e)))
        typer.echo(f"Error: {e}", err=True)
        return e.exit_code
    logger.info("run finished", subcommand=run.subcommand, out=str(run.output_dir))
    return 0


def _start(subcommand: str, config: Optional[Path], out: Optional[Path], threads: Optional[int],
           seed: Optional[int]):
    try:
        return _resolve(subcommand, config, out, threads, seed)
    except LabError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(e.exit_code)


def _sweep_outputs(run: RunConfig, result: SweepResult) -> None:
    frame = pd.DataFrame({
        "alpha": result.alpha_values,
        "trace": result.traces,
        "normalized": result.normalized_traces,
    })
    _write_table(run, frame)
    _write_json(run.output_dir / "summary.json", result)
    typer.echo(f"c1 = {result.fitted_c1:.6g} (predicted {result.predicted_W1:.6g}), "
               f"c2 = {result.fitted_c2:.6g}, gap = {result.relative_gap}")


# Subcommands

@app.command("szego")
def szego(config: ConfigOption = None, out: OutOption = None, threads: ThreadsOption = None,
          seed: SeedOption = None) -> int:
    """Alpha sweep of tr D_alpha(a, Lambda, Omega; g) against the surface coefficient"""
    run, fields = _start("szego", config, out, threads, seed)

    def action():
        experiment = _validated(SzegoConfig, dict(fields, threads=run.thread_count))
        _echo_config(run, experiment)
        with ExperimentService(run.thread_count) as service:
            _sweep_outputs(run, service.szego_sweep(experiment))

    return _guarded(run, action)


@app.command("jump")
def jump(config: ConfigOption = None, out: OutOption = None, threads: ThreadsOption = None,
         seed: SeedOption = None) -> int:
    """Alpha sweep with a symbol jumping across the boundary of Omega"""
    run, fields = _start("jump", config, out, threads, seed)

    def action():
        experiment = _validated(JumpConfig, dict(fields, threads=run.thread_count))
        _echo_config(run, experiment)
        with ExperimentService(run.thread_count) as service:
            _sweep_outputs(run, service.jump_sweep(experiment))

    return _guarded(run, action)


@app.command("cross-growth")
def cross_growth(config: ConfigOption = None, out: OutOption = None, threads: ThreadsOption = None,
                 seed: SeedOption = None) -> int:
    """Quasi-norm growth of the off-diagonal blocks"""
    run, fields = _start("cross-growth", config, out, threads, seed)

    def action():
        experiment = _validated(CrossGrowthConfig, dict(fields, threads=run.thread_count))
        _echo_config(run, experiment)
        with ExperimentService(run.thread_count) as service:
            table = service.cross_growth_sweep(experiment)
        _write_table(run, table.to_frame())
        _write_json(run.output_dir / "summary.json", table)
        typer.echo(f"band max/min = {table.band:.4g}")

    return _guarded(run, action)


@app.command("hs-suite")
def hs_suite(config: ConfigOption = None, out: OutOption = None, threads: ThreadsOption = None,
             seed: SeedOption = None) -> int:
    """hs_apply against spectral_apply on random Hermitian matrices"""
    run, fields = _start("hs-suite", config, out, threads, seed)

    def action():
        experiment = _validated(HSSuiteConfig, dict(fields, threads=run.thread_count, seed=run.seed))
        _echo_config(run, experiment)
        with ExperimentService(run.thread_count) as service:
            report = service.hs_vs_spectral_suite(experiment)
        _write_table(run, pd.DataFrame([case.model_dump() for case in report.cases]))
        _write_json(run.output_dir / "summary.json", report)
        typer.echo(f"{report.passed} passed, {report.failed} failed, max deviation {report.max_deviation:.3e}")

    return _guarded(run, action)


@app.command("split")
def split(config: ConfigOption = None, out: OutOption = None, threads: ThreadsOption = None,
          seed: SeedOption = None) -> int:
    """Shrinking localized singular piece: seminorm, surface coefficient and trace"""
    run, fields = _start("split", config, out, threads, seed)

    def action():
        experiment = _validated(SplitConfig, dict(fields, threads=run.thread_count))
        _echo_config(run, experiment)
        with ExperimentService(run.thread_count) as service:
            rows = service.split_sweep(experiment)
        _write_table(run, pd.DataFrame([row.model_dump() for row in rows]))

    return _guarded(run, action)


@app.command("closure")
def closure(config: ConfigOption = None, out: OutOption = None, threads: ThreadsOption = None,
            seed: SeedOption = None) -> int:
    """Trace difference between g and its Chebyshev approximant across alpha"""
    run, fields = _start("closure", config, out, threads, seed)

    def action():
        experiment = _validated(ClosureConfig, dict(fields, threads=run.thread_count))
        _echo_config(run, experiment)
        with ExperimentService(run.thread_count) as service:
            rows = service.polynomial_closure_sweep(experiment)
        _write_table(run, pd.DataFrame([row.model_dump() for row in rows]))

    return _guarded(run, action)


@app.command("bound-sweep")
def bound_sweep(
    theorem: Annotated[Optional[str], typer.Option("--theorem", help="2.4, 2.8, gest, bks or ps")] = None,
    trials: Annotated[Optional[int], typer.Option("--trials", min=1)] = None,
    config: ConfigOption = None, out: OutOption = None, threads: ThreadsOption = None, seed: SeedOption = None,
) -> int:
    """Random-instance sweep of one inequality; CSV of ratios and a JSON summary"""
    run, fields = _start("bound-sweep", config, out, threads, seed)

    def action():
        overrides = {k: v for k, v in dict(theorem=theorem, trials=trials).items() if v is not None}
        experiment = _validated(BoundSweepConfig, dict(fields, **overrides, seed=run.seed,
                                                       threads=run.thread_count))
        _echo_config(run, experiment)
        with SweepService(run.thread_count) as service:
            rows, summary = service.bound_sweep(experiment)
        frame = pd.DataFrame([dict(instance=r.instance, dimension=r.dimension, **r.params, ratio=r.ratio)
                              for r in rows])
        _write_table(run, frame)
        _write_json(run.output_dir / "summary.json", summary)
        typer.echo(f"max ratio {summary.max_ratio:.4g}, mean {summary.mean_ratio:.4g}, "
                   f"scaling {summary.dimension_scaling_factor:.4g}, violations {summary.violations}")

    return _guarded(run, action)


@app.command("coeffs")
def coeffs(
    g: Annotated[str, typer.Option("--g", help="Function label, e.g. eta:1")],
    s: Annotated[Optional[List[float]], typer.Option("--s", help="Sample points of A(g; s)")] = None,
    s1: Annotated[Optional[float], typer.Option("--s1", help="Second argument; adds D(g; s, s1)")] = None,
    symbol: Annotated[Optional[str], typer.Option("--symbol", help="Symbol label; adds W0 and W1")] = None,
    domains: Annotated[Optional[Path], typer.Option("--domains", exists=True, dir_okay=False)] = None,
    out: OutOption = None, threads: ThreadsOption = None,
) -> int:
    """A(g; s), D(g; s, s1) samples and, with a symbol, W0 and W1 over the domains"""
    run, fields = _start("coeffs", domains, out, threads, None)

    def action():
        f = function_from_label(g)
        report = CoeffsReport(function=g, symbol=symbol or "")
        for value in s or []:
            report.GA[f"{value:g}"] = ga(f, value)
            if s1 is not None:
                report.GD[f"{value:g},{s1:g}"] = gd(f, value, s1)
        if symbol is not None:
            a = symbol_from_label(symbol)
            lam = build_domain(fields.get("lambda_domain", {"kind": "disk"}))
            omega = build_domain(fields.get("omega_domain", {"kind": "disk"}))
            report.W0 = w0(lambda x, xi: f(np.asarray(a.real_part(x, xi), dtype=float)), lam, omega)
            report.W1 = predicted_w1(f, a, lam, omega, nodes=fields.get("w1_nodes"), threads=run.thread_count)
        _echo_config(run, extra=dict(g=g, s=list(s or []), s1=s1, symbol=symbol))
        _write_json(run.output_dir / "coeffs.json", report)
        typer.echo(report.model_dump_json(indent=2))

    return _guarded(run, action)


@app.command("hs-apply")
def hs_apply(
    function: Annotated[str, typer.Option("--function", help="Function label")],
    matrix: Annotated[Path, typer.Option("--matrix", exists=True, dir_okay=False, help="Hermitian matrix file")],
    tol: Annotated[Optional[float], typer.Option("--tol", min=0.0)] = None,
    n: Annotated[Optional[int], typer.Option("--n", help="Extension order")] = None,
    config: ConfigOption = None, out: OutOption = None, threads: ThreadsOption = None,
) -> int:
    """f(A) by the Helffer-Sjostrand formula; result matrix and error certificate"""
    run, fields = _start("hs-apply", config, out, threads, None)

    def action():
        quadrature = dict(fields.get("quadrature") or {})
        if tol is not None:
            quadrature["target_tolerance"] = tol
        spec = _validated(QuadratureSpec, quadrature)
        _echo_config(run, spec, extra=dict(function=function, matrix=str(matrix), n=n))
        A = DenseOperator.checked_hermitian(read_matrix(matrix))
        result = hs_apply_function(function_from_label(function), A, spec, n, run.thread_count)
        write_matrix(run.output_dir / "result.txt", result.entries)
        certificate = dict(function=function, dimension=A.shape[0], error_estimate=result.error_estimate,
                           target_tolerance=spec.target_tolerance, grid=result.grid_meta)
        (run.output_dir / "certificate.json").write_text(json.dumps(certificate, indent=2))
        typer.echo(f"error estimate {result.error_estimate:.3e}")

    return _guarded(run, action)


@app.command("qa-extension")
def qa_extension(
    function: Annotated[str, typer.Option("--function", help="Function label")],
    n: Annotated[Optional[int], typer.Option("--n", help="Extension order")] = None,
    config: ConfigOption = None, out: OutOption = None,
) -> int:
    """CSV of (x, y, |omega|, majorant) on the cone grid"""
    run, fields = _start("qa-extension", config, out, None, None)

    def action():
        ext = build_extension(function_from_label(function), n)
        x, y = cone_grid(ext, int(fields.get("radial", 60)), int(fields.get("angular", 21)))
        _echo_config(run, extra=dict(function=function, n=ext.n))
        _write_table(run, omega_profile(ext, x, y))

    return _guarded(run, action)


def parse_and_dispatch(argv: List[str]) -> int:
    """Run one command line; returns the process exit code"""
    command = typer.main.get_command(app)
    try:
        result = command.main(args=list(argv), prog_name="szegolab", standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    return result if isinstance(result, int) else 0


def run():
    """Console entry point"""
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    run()
