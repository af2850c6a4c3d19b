from __future__ import annotations

import json
import logging
from dataclasses import asdict
from pathlib import Path

import typer
from pydantic import BaseModel, ValidationError
from rich import print
from rich.markup import escape
from rich.table import Table

from ccfl_lab import __version__
from ccfl_lab.channel import build_channels
from ccfl_lab.errors import InfeasibleError, ScenarioError
from ccfl_lab.montecarlo import (
    CovertCheck,
    run_fedavg_demo,
    validate_allocation,
    validate_covert_grid,
)
from ccfl_lab.montecarlo.detection import DEFAULT_RATIOS, MIN_TRIALS, ORACLE_SIGMAS
from ccfl_lab.optimizer import OptimizerSettings, OptimizationResult, optimize
from ccfl_lab.report import RunMetadata, write_metadata, write_plot_script, write_rows
from ccfl_lab.scenario import (
    Scenario,
    from_preset,
    load_scenario,
    preset_constants,
    save_scenario,
    scenario_digest,
    with_overrides,
)
from ccfl_lab.settings import settings
from ccfl_lab.sweep import SweepSpec, run_sweep, summarize

app = typer.Typer(add_completion=False, help="ccfl-lab CLI")

DEFAULT_PRESET = "paper-fig3"


class ResultRow(BaseModel):
    feasible: bool
    latency: float | None = None
    eta: float | None = None
    p_j: float | None = None
    covert_prob: float | None = None
    outer_iterations: int | None = None
    converged: bool | None = None
    error: str | None = None


class DeviceRow(BaseModel):
    device: int
    power: float
    compute_time: float
    upload_time: float
    round_time: float
    p_fa: float
    p_md: float
    covert_prob: float
    threshold: float


class TraceRow(BaseModel):
    round: int
    global_loss: float
    global_accuracy: float
    transmissions: int


def _configure_logging(log_level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _fail(title: str, *details: str, code: int = 1) -> typer.Exit:
    print(f"[red]{title}[/red]")
    for d in details:
        print(f"- {escape(d)}")
    return typer.Exit(code=code)


def _resolve_scenario(
    config: Path | None,
    preset: str | None,
    seed: int,
    *,
    n_devices: int | None = None,
    epsilon: float | None = None,
    budget: float | None = None,
) -> Scenario:
    if config is not None and preset is not None:
        raise typer.BadParameter("Use either --config or --preset, not both.")
    try:
        if config is not None:
            s = load_scenario(config)
        else:
            s = from_preset(preset or DEFAULT_PRESET, seed, n_devices=n_devices)
        return with_overrides(s, epsilon=epsilon, budget=budget)
    except ValueError as e:
        raise _fail("Scenario configuration error.", str(e)) from e


def _parse_list(text: str, cast: type, flag: str) -> list:
    try:
        return [cast(x) for x in (p.strip() for p in text.split(",")) if x]
    except ValueError as e:
        raise typer.BadParameter(f"{flag}: {e}") from e


def _device_rows(result: OptimizationResult) -> list[DeviceRow]:
    lat = result.latency
    return [
        DeviceRow(
            device=i,
            power=result.allocation.device_powers[i],
            compute_time=lat.per_device_compute[i],
            upload_time=lat.per_device_upload[i],
            round_time=lat.per_device_round[i],
            p_fa=rep.p_fa,
            p_md=rep.p_md,
            covert_prob=rep.covert_prob,
            threshold=rep.threshold,
        )
        for i, rep in enumerate(result.covert)
    ]


def _result_row(result: OptimizationResult) -> ResultRow:
    return ResultRow(
        feasible=True,
        latency=result.latency.total,
        eta=result.allocation.local_accuracy,
        p_j=result.allocation.jam_power,
        covert_prob=result.network_covert_prob,
        outer_iterations=result.outer_iterations,
        converged=result.converged,
    )


def _print_result(result: OptimizationResult) -> None:
    table = Table(title="Optimized allocation")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("FL latency (s)", f"{result.latency.total:.6g}")
    table.add_row("local accuracy eta", f"{result.allocation.local_accuracy:.6f}")
    table.add_row("jamming power (W)", f"{result.allocation.jam_power:.6g}")
    table.add_row("network covert probability", f"{result.network_covert_prob:.6f}")
    table.add_row("bottleneck device", str(result.latency.bottleneck))
    table.add_row("outer iterations", str(result.outer_iterations))
    print(table)


@app.command()
def show_config() -> None:
    """Print the current effective settings."""
    print(json.dumps(settings.model_dump(mode="json", by_alias=True), ensure_ascii=False, indent=2))


@app.command()
def write_config(
    out: Path = typer.Option(..., help="Where to write the scenario JSON."),
    preset: str = typer.Option(DEFAULT_PRESET, help="Preset name."),
    seed: int = typer.Option(7, help="Topology seed."),
    n_devices: int | None = typer.Option(None, help="Override the preset's device count."),
) -> None:
    """Write a scenario file generated from a preset."""
    s = _resolve_scenario(None, preset, seed, n_devices=n_devices)
    save_scenario(s, out)
    print(f"[green]OK[/green] wrote {out} ({s.n_devices} devices, digest {scenario_digest(s)[:12]}).")


@app.command("optimize")
def cmd_optimize(
    config: Path | None = typer.Option(None, help="Scenario JSON file."),
    preset: str | None = typer.Option(None, help="Preset name (default: paper-fig3)."),
    seed: int = typer.Option(7, help="Topology seed (preset only)."),
    out: Path | None = typer.Option(None, help="Output directory (default: CCFL_OUT_DIR/optimize)."),
    n_devices: int | None = typer.Option(None, help="Override the preset's device count."),
    epsilon: float | None = typer.Option(None, help="Override the security threshold."),
    budget: float | None = typer.Option(None, help="Override the server budget ($)."),
    log_level: str = typer.Option(settings.log_level, help="Logging level (DEBUG/INFO/WARNING/ERROR)."),
) -> None:
    """Minimise FL latency under the covertness, power and budget constraints."""
    _configure_logging(log_level)
    out_dir = out or settings.out_dir / "optimize"
    s = _resolve_scenario(config, preset, seed, n_devices=n_devices, epsilon=epsilon, budget=budget)
    cfg = OptimizerSettings.from_settings()
    meta = RunMetadata(
        command="optimize",
        seed=s.seed,
        scenario_digest=scenario_digest(s),
        scenario=s.model_dump(mode="json"),
        optimizer=asdict(cfg),
    )
    write_metadata(out_dir, meta)

    try:
        result = optimize(s, cfg)
    except InfeasibleError as e:
        write_rows(out_dir / "result.csv", [ResultRow(feasible=False, error=str(e))])
        raise _fail("Infeasible.", str(e), f"Violated: {e.constraint}") from e
    except ValueError as e:
        raise _fail("Cannot optimize this scenario.", str(e)) from e

    write_rows(out_dir / "result.csv", [_result_row(result)])
    write_rows(out_dir / "devices.csv", _device_rows(result))
    _print_result(result)
    print(f"[green]OK[/green] wrote {out_dir}.")


@app.command("sweep")
def cmd_sweep(
    axis: str = typer.Option(..., help="n_devices | epsilon | budget"),
    values: str = typer.Option(..., help="Comma-separated, strictly increasing values."),
    seeds: str = typer.Option("1,2,3,4,5", help="Comma-separated topology seeds."),
    preset: str = typer.Option(DEFAULT_PRESET, help="Preset whose constants form the sweep base."),
    out: Path | None = typer.Option(None, help="Output directory (default: CCFL_OUT_DIR/sweep-<axis>)."),
    jobs: int | None = typer.Option(None, help="Worker processes (default: CCFL_JOBS or all cores)."),
    plot_script: bool = typer.Option(False, help="Also write a matplotlib script for the summary."),
    log_level: str = typer.Option(settings.log_level, help="Logging level (DEBUG/INFO/WARNING/ERROR)."),
) -> None:
    """Optimise every (value, seed) point of a parameter sweep."""
    _configure_logging(log_level)
    try:
        spec = SweepSpec(
            axis=axis,
            values=_parse_list(values, float, "--values"),
            seeds=_parse_list(seeds, int, "--seeds"),
            base=preset_constants(preset),
        )
    except (ValidationError, ScenarioError) as e:
        raise _fail("Invalid sweep specification.", str(e)) from e

    out_dir = out or settings.out_dir / f"sweep-{spec.axis}"
    cfg = OptimizerSettings.from_settings()
    n_jobs = jobs if jobs is not None else settings.effective_jobs()
    rows = run_sweep(spec, cfg, jobs=max(1, n_jobs))
    summary = summarize(rows)

    write_rows(out_dir / "sweep.csv", rows)
    write_rows(out_dir / "summary.csv", summary)
    write_metadata(
        out_dir,
        RunMetadata(
            command="sweep",
            seeds=spec.seeds,
            sweep=spec.model_dump(mode="json"),
            optimizer=asdict(cfg),
        ),
    )
    if plot_script:
        write_plot_script(out_dir, spec.axis)

    table = Table(title=f"Sweep over {spec.axis}")
    for col in ("value", "feasible", "median latency (s)", "median covert prob"):
        table.add_column(col, justify="right")
    for r in summary:
        table.add_row(
            f"{r.value:g}",
            f"{r.feasible_points}/{r.points}",
            "-" if r.median_latency is None else f"{r.median_latency:.6g}",
            "-" if r.median_covert_prob is None else f"{r.median_covert_prob:.6f}",
        )
    print(table)
    print(f"[green]OK[/green] wrote {out_dir}.")


@app.command("validate")
def cmd_validate(
    config: Path | None = typer.Option(None, help="Scenario JSON file."),
    preset: str | None = typer.Option(None, help="Preset name (default: paper-fig3)."),
    seed: int = typer.Option(7, help="Seed for topology, fading, traffic and data streams."),
    trials: int = typer.Option(settings.mc_trials, help="Monte-Carlo trials per check."),
    out: Path | None = typer.Option(None, help="Output directory (default: CCFL_OUT_DIR/validate)."),
    jobs: int | None = typer.Option(None, help="Threads per Monte-Carlo check (default: CCFL_JOBS or all cores)."),
    per_device: bool = typer.Option(False, help="Also simulate every device at the optimized allocation."),
    target_accuracy: float = typer.Option(0.95, help="FedAvg demo stopping accuracy."),
    max_rounds: int = typer.Option(50, help="FedAvg demo round limit."),
    log_level: str = typer.Option(settings.log_level, help="Logging level (DEBUG/INFO/WARNING/ERROR)."),
) -> None:
    """Check the covert closed forms by Monte Carlo and run the FedAvg demo."""
    _configure_logging(log_level)
    if trials < MIN_TRIALS:
        raise _fail("Too few trials.", f"--trials must be >= {MIN_TRIALS} (got {trials}).")
    out_dir = out or settings.out_dir / "validate"
    s = _resolve_scenario(config, preset, seed)
    n_jobs = max(1, jobs if jobs is not None else settings.effective_jobs())

    checks: list[CovertCheck] = validate_covert_grid(DEFAULT_RATIOS, trials, seed, jobs=n_jobs)
    write_rows(out_dir / "covert_validation.csv", checks)

    extra: dict = {}
    try:
        ch = build_channels(s)
        result = optimize(s, OptimizerSettings.from_settings(), ch)
    except InfeasibleError as e:
        print(f"[yellow]Skipping allocation checks and FedAvg demo:[/yellow] {escape(str(e))}")
        extra["fedavg"] = f"skipped: {e}"
    else:
        if per_device:
            per_device_rows = validate_allocation(result.allocation, ch, trials, seed, jobs=n_jobs)
            write_rows(out_dir / "allocation_validation.csv", per_device_rows)
        trace = run_fedavg_demo(s, result.allocation, target_accuracy, max_rounds, seed)
        rows = [
            TraceRow(round=k + 1, global_loss=loss, global_accuracy=acc, transmissions=tx)
            for k, (loss, acc, tx) in enumerate(
                zip(
                    trace.global_loss_per_round,
                    trace.global_accuracy_per_round,
                    trace.transmissions_per_round,
                    strict=True,
                )
            )
        ]
        write_rows(out_dir / "fedavg_trace.csv", rows, model=TraceRow)
        extra["fedavg"] = trace.model_dump(include={"rounds", "local_steps", "reached_target"})
        if trace.flagged:
            print(f"[yellow]FedAvg demo stopped at {max_rounds} rounds below {target_accuracy}.[/yellow]")

    write_metadata(
        out_dir,
        RunMetadata(
            command="validate",
            seed=seed,
            scenario_digest=scenario_digest(s),
            scenario=s.model_dump(mode="json"),
            extra={"trials": trials, **extra},
        ),
    )

    table = Table(title=f"Covert closed forms vs Monte Carlo ({trials} trials)")
    for col in ("r", "analytic xi*", "empirical xi", "std err", "ok"):
        table.add_column(col, justify="right")
    for c in checks:
        table.add_row(
            f"{c.ratio:g}",
            f"{c.analytic_xi:.6f}",
            f"{c.empirical_xi:.6f}",
            f"{c.std_error:.2e}",
            "yes" if c.passed else "NO",
        )
    print(table)

    failed = [c.label for c in checks if not c.passed]
    if failed:
        detail = f"outside {ORACLE_SIGMAS:g} standard errors: {', '.join(failed)}"
        raise _fail("Oracle agreement failed.", detail, code=2)
    print(f"[green]OK[/green] wrote {out_dir}.")


@app.command()
def version() -> None:
    """Print the tool version."""
    print(__version__)
