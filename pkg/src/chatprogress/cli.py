"""Command line entry points: serve, replay, stats."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import report as report_mod
from .domain import TaskFormatError
from .events import EventStore
from .gateway import DeterministicJudge, RemoteJudge, TaskBackendConfig, build_task_backend
from .service import (
    DEFAULT_SESSION_TIMEOUT_S,
    MalformedTranscript,
    SessionService,
    TaskRegistry,
    replay_transcript,
)
from .surveys import SchemaError, load_survey_csv


def _backend_config(raw: dict) -> TaskBackendConfig:
    return TaskBackendConfig(
        kind=raw["kind"],
        endpoint=raw.get("endpoint"),
        api_key_env=raw.get("apiKeyEnv"),
        script_path=raw.get("scriptPath"),
        model=raw.get("model", ""),
        timeout_s=float(raw.get("timeoutS", 30.0)),
        max_retries=int(raw.get("maxRetries", 2)),
    )


def build_service_from_config(config_path: str | Path) -> SessionService:
    with open(config_path, encoding="utf-8") as handle:
        config = json.load(handle)
    registry = TaskRegistry.with_builtin()
    for task_path in config.get("tasks", []):
        registry.load_file(task_path)
    task_backend = build_task_backend(_backend_config(config["taskAgent"]))
    judge_raw = config.get("feedbackAgent", {"kind": "deterministic"})
    if judge_raw.get("kind") == "remote":
        judge = RemoteJudge(_backend_config({**judge_raw, "kind": "remote"}))
    else:
        judge = DeterministicJudge()
    return SessionService(
        tasks=registry,
        store=EventStore(config.get("dataDir", "./data")),
        task_backend=task_backend,
        judge_backend=judge,
        session_timeout_s=int(config.get("sessionTimeoutS", DEFAULT_SESSION_TIMEOUT_S)),
    )


@click.group()
def main() -> None:
    """Conversational task sessions with visual progress feedback."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(config_path: str, port: int, host: str) -> None:
    """Run the session service HTTP API."""
    import uvicorn

    from .api import create_app

    app = create_app(build_service_from_config(config_path))
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--task", "task_ref", required=True, help="Registered task id or a task definition file.")
@click.option("--transcript", "transcript_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", type=click.Path(), default=None,
              help="Write the full event log here instead of stdout.")
def replay(task_ref: str, transcript_path: str, output_path: str | None) -> None:
    """Replay a recorded transcript through the deterministic pipeline."""
    registry = TaskRegistry.with_builtin()
    if task_ref in registry.ids():
        task_id = task_ref
    elif Path(task_ref).is_file():
        try:
            task_id = registry.load_file(task_ref)
        except TaskFormatError as exc:
            raise click.ClickException(str(exc)) from exc
    else:
        raise click.ClickException(
            f"unknown task {task_ref!r}; registered tasks: {', '.join(registry.ids())}"
        )
    try:
        result = replay_transcript(transcript_path, registry.get(task_id), task_id=task_id)
    except MalformedTranscript as exc:
        raise click.ClickException(str(exc)) from exc
    serialized = result.serialize()
    if output_path:
        Path(output_path).write_text(serialized, encoding="utf-8")
    else:
        sys.stdout.write(serialized)
    completed = ", ".join(str(s) for s in result.final_state.progress.display_order) or "none"
    click.echo(
        f"replayed {len(result.events)} events; completed steps: {completed}; "
        f"goal reached {result.final_state.progress.goal_reached_count} time(s)",
        err=True,
    )


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Survey CSV (participant,group,phase,instrument,item1..item6).")
@click.option("--report", "report_dir", required=True, type=click.Path(),
              help="Output directory for tables, plot data, and figures.")
@click.option("--metrics", "metrics_path", type=click.Path(exists=True), default=None,
              help="Optional session metrics CSV.")
@click.option("--between-t", type=click.Choice(["welch", "pooled"]), default="welch", show_default=True)
@click.option("--d-paired", type=click.Choice(["sd-diff", "sd-average"]), default="sd-diff", show_default=True)
@click.option("--d-independent", type=click.Choice(["pooled", "average"]), default="pooled", show_default=True)
def stats(input_path: str, report_dir: str, metrics_path: str | None,
          between_t: str, d_paired: str, d_independent: str) -> None:
    """Score surveys and render the study report with figures."""
    try:
        responses = load_survey_csv(input_path)
    except SchemaError as exc:
        raise click.ClickException(str(exc)) from exc
    metrics = report_mod.load_metrics_csv(metrics_path) if metrics_path else ()
    config = report_mod.AnalysisConfig(
        between_t=between_t, d_paired=d_paired, d_independent=d_independent
    )
    try:
        result = report_mod.build_report(responses, metrics, config)
    except report_mod.DatasetError as exc:
        raise click.ClickException(str(exc)) from exc
    written = report_mod.write_report(result, report_dir)
    for path in written:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
