"""Study report: scored surveys, significance tests, effect sizes, figures.

The output mirrors the structure of the study write-up: one effect-size
row per group across the six self-efficacy items, per-item summary tables
for cognitive load and satisfaction, and grouped-bar figures with standard
deviation whiskers rendered next to the delimited tables. Every table and
figure states the formula variant that produced it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .analysis import (
    DegenerateVariance,
    TTestResult,
    cohens_d_independent,
    cohens_d_paired,
    independent_t_test,
    mean,
    paired_t_test,
    sample_sd,
)
from .surveys import (
    GROUPS,
    INSTRUMENT_ITEMS,
    INSTRUMENT_NASA_TLX,
    INSTRUMENT_SATISFACTION,
    INSTRUMENT_SELF_EFFICACY,
    SurveyResponse,
)


class DatasetError(ValueError):
    """The survey rows are schema-valid but not analyzable as a dataset."""


@dataclass(frozen=True)
class AnalysisConfig:
    """Formula variants; each is labeled in the rendered output."""

    between_t: str = "welch"  # "welch" | "pooled"
    d_paired: str = "sd-diff"  # "sd-diff" | "sd-average"
    d_independent: str = "pooled"  # "pooled" | "average"

    def labels(self) -> dict[str, str]:
        return {
            "betweenT": f"independent t ({self.between_t})",
            "prepostT": "paired t (classic)",
            "dPaired": f"paired d = mean(diff)/{self.d_paired}",
            "dIndependent": f"independent d ({self.d_independent} SD)",
        }


@dataclass(frozen=True)
class ItemStats:
    """Pre/post statistics for one survey item within one group.

    The raw score vectors are retained so every reported effect size can
    be audited against its inputs.
    """

    item: int
    group: str
    pre_scores: tuple[int, ...]
    post_scores: tuple[int, ...]
    pre_mean: float
    pre_sd: float
    post_mean: float
    post_sd: float
    t: float | None
    p: float | None
    d: float | None


@dataclass(frozen=True)
class PostOnlyItemStats:
    """Per-item group means for a post-only instrument plus the group contrast.

    ``d`` is the between-group effect size (experimental vs control) in the
    configured variant; the raw score vectors stay attached for audit.
    """

    instrument: str
    item: int
    control_scores: tuple[int, ...]
    experimental_scores: tuple[int, ...]
    control_mean: float
    control_sd: float
    experimental_mean: float
    experimental_sd: float
    t: float | None
    p: float | None
    d: float | None


@dataclass(frozen=True)
class MetricsRow:
    session_id: str
    group: str
    task_time_s: float
    interaction_count: float
    completed: bool


@dataclass(frozen=True)
class GroupMetricsStats:
    group: str
    sessions: int
    mean_task_time_s: float
    sd_task_time_s: float
    mean_interaction_count: float
    sd_interaction_count: float
    completion_rate: float


@dataclass(frozen=True)
class StatsReport:
    config: AnalysisConfig
    self_efficacy: tuple[ItemStats, ...]
    pre_between_p: Mapping[int, float | None]
    nasa_tlx: tuple[PostOnlyItemStats, ...]
    satisfaction: tuple[PostOnlyItemStats, ...]
    group_metrics: tuple[GroupMetricsStats, ...] = ()
    metrics_contrasts: Mapping[str, float | None] = field(default_factory=dict)

    def effect_size_table(self) -> dict[str, dict[int, float | None]]:
        """Rows: experimental / control; columns: the survey items."""
        table: dict[str, dict[int, float | None]] = {"experimental": {}, "control": {}}
        for stats in self.self_efficacy:
            table[stats.group][stats.item] = stats.d
        return table


def _paired_scores(
    responses: Sequence[SurveyResponse], group: str, item: int
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Pre and post vectors for one item, aligned by sorted participant id."""
    pre = {r.participant_id: r.scores[item - 1] for r in responses if r.group == group and r.phase == "pre"}
    post = {r.participant_id: r.scores[item - 1] for r in responses if r.group == group and r.phase == "post"}
    missing_post = sorted(set(pre) - set(post))
    missing_pre = sorted(set(post) - set(pre))
    if missing_post:
        raise DatasetError(f"participant {missing_post[0]!r} ({group}) has no post-task response")
    if missing_pre:
        raise DatasetError(f"participant {missing_pre[0]!r} ({group}) has no pre-task response")
    participants = sorted(pre)
    return (
        tuple(pre[pid] for pid in participants),
        tuple(post[pid] for pid in participants),
    )


def _safe(func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except DegenerateVariance:
        return None


def _self_efficacy_stats(
    responses: Sequence[SurveyResponse], config: AnalysisConfig
) -> tuple[tuple[ItemStats, ...], dict[int, float | None]]:
    rows = [r for r in responses if r.instrument == INSTRUMENT_SELF_EFFICACY]
    if not rows:
        raise DatasetError("no self-efficacy responses in the dataset")
    items = INSTRUMENT_ITEMS[INSTRUMENT_SELF_EFFICACY]
    stats: list[ItemStats] = []
    pre_between: dict[int, float | None] = {}
    for item in range(1, items + 1):
        per_group: dict[str, tuple[tuple[int, ...], tuple[int, ...]]] = {}
        for group in GROUPS:
            pre, post = _paired_scores(rows, group, item)
            if len(pre) < 2:
                raise DatasetError(f"group {group!r} has fewer than 2 participants")
            per_group[group] = (pre, post)
            test: TTestResult | None = _safe(paired_t_test, pre, post)
            stats.append(
                ItemStats(
                    item=item,
                    group=group,
                    pre_scores=pre,
                    post_scores=post,
                    pre_mean=mean(pre),
                    pre_sd=sample_sd(pre),
                    post_mean=mean(post),
                    post_sd=sample_sd(post),
                    t=test.t if test else None,
                    p=test.p if test else None,
                    d=_safe(cohens_d_paired, pre, post, method=config.d_paired),
                )
            )
        between = _safe(
            independent_t_test,
            per_group["experimental"][0],
            per_group["control"][0],
            equal_variance=config.between_t == "pooled",
        )
        pre_between[item] = between.p if between else None
    return tuple(stats), pre_between


def _post_only_stats(
    responses: Sequence[SurveyResponse], instrument: str, config: AnalysisConfig
) -> tuple[PostOnlyItemStats, ...]:
    rows = [r for r in responses if r.instrument == instrument]
    if not rows:
        return ()
    stats = []
    for item in range(1, INSTRUMENT_ITEMS[instrument] + 1):
        by_group = {
            group: tuple(
                r.scores[item - 1]
                for r in sorted(rows, key=lambda r: r.participant_id)
                if r.group == group
            )
            for group in GROUPS
        }
        if any(len(scores) < 2 for scores in by_group.values()):
            raise DatasetError(f"{instrument} needs at least 2 responses per group")
        test = _safe(
            independent_t_test,
            by_group["experimental"],
            by_group["control"],
            equal_variance=config.between_t == "pooled",
        )
        stats.append(
            PostOnlyItemStats(
                instrument=instrument,
                item=item,
                control_scores=by_group["control"],
                experimental_scores=by_group["experimental"],
                control_mean=mean(by_group["control"]),
                control_sd=sample_sd(by_group["control"]),
                experimental_mean=mean(by_group["experimental"]),
                experimental_sd=sample_sd(by_group["experimental"]),
                t=test.t if test else None,
                p=test.p if test else None,
                d=_safe(
                    cohens_d_independent,
                    by_group["experimental"],
                    by_group["control"],
                    method=config.d_independent,
                ),
            )
        )
    return tuple(stats)


def _group_metrics(
    metrics: Sequence[MetricsRow], config: AnalysisConfig
) -> tuple[tuple[GroupMetricsStats, ...], dict[str, float | None]]:
    if not metrics:
        return (), {}
    summaries = []
    by_group = {g: [m for m in metrics if m.group == g] for g in GROUPS}
    for group, rows in by_group.items():
        if not rows:
            continue
        times = [m.task_time_s for m in rows]
        counts = [m.interaction_count for m in rows]
        summaries.append(
            GroupMetricsStats(
                group=group,
                sessions=len(rows),
                mean_task_time_s=mean(times),
                sd_task_time_s=sample_sd(times) if len(times) > 1 else 0.0,
                mean_interaction_count=mean(counts),
                sd_interaction_count=sample_sd(counts) if len(counts) > 1 else 0.0,
                completion_rate=sum(1 for m in rows if m.completed) / len(rows),
            )
        )
    contrasts: dict[str, float | None] = {}
    if all(len(rows) >= 2 for rows in by_group.values()):
        for name, key in (("taskTime", "task_time_s"), ("interactionCount", "interaction_count")):
            test = _safe(
                independent_t_test,
                [getattr(m, key) for m in by_group["experimental"]],
                [getattr(m, key) for m in by_group["control"]],
                equal_variance=config.between_t == "pooled",
            )
            contrasts[name] = test.p if test else None
    return tuple(summaries), contrasts


def build_report(
    responses: Sequence[SurveyResponse],
    metrics: Sequence[MetricsRow] = (),
    config: AnalysisConfig = AnalysisConfig(),
) -> StatsReport:
    self_efficacy, pre_between = _self_efficacy_stats(responses, config)
    group_metrics, contrasts = _group_metrics(metrics, config)
    return StatsReport(
        config=config,
        self_efficacy=self_efficacy,
        pre_between_p=pre_between,
        nasa_tlx=_post_only_stats(responses, INSTRUMENT_NASA_TLX, config),
        satisfaction=_post_only_stats(responses, INSTRUMENT_SATISFACTION, config),
        group_metrics=group_metrics,
        metrics_contrasts=contrasts,
    )


def load_metrics_csv(path: str | Path) -> list[MetricsRow]:
    """Metrics export: session,group,task_time_s,interaction_count,completed."""
    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        for raw in csv.DictReader(handle):
            rows.append(
                MetricsRow(
                    session_id=raw["session"],
                    group=raw["group"],
                    task_time_s=float(raw["task_time_s"]),
                    interaction_count=float(raw["interaction_count"]),
                    completed=raw["completed"].strip().lower() in ("1", "true", "yes"),
                )
            )
    return rows


# -- rendering ----------------------------------------------------------------

def _fmt(value: float | None, digits: int = 3) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def render_text(report: StatsReport) -> str:
    labels = report.config.labels()
    lines = ["STUDY REPORT", "============", ""]
    lines.append("Formulas: " + "; ".join(labels.values()))
    lines.append("")
    lines.append("Self-efficacy (pre vs post, per group)")
    lines.append(f"{'item':>4} {'group':>13} {'pre':>12} {'post':>12} {'t':>8} {'p':>8} {'d':>8}")
    for s in report.self_efficacy:
        pre = f"{s.pre_mean:.2f}±{s.pre_sd:.2f}"
        post = f"{s.post_mean:.2f}±{s.post_sd:.2f}"
        lines.append(
            f"Q{s.item:>3} {s.group:>13} {pre:>12} {post:>12} {_fmt(s.t):>8} {_fmt(s.p):>8} {_fmt(s.d):>8}"
        )
    lines.append("")
    lines.append("Pre-task between-group p-values (should show no significant difference)")
    for item, p in sorted(report.pre_between_p.items()):
        lines.append(f"  Q{item}: p = {_fmt(p)}")
    lines.append("")
    table = report.effect_size_table()
    items = sorted({s.item for s in report.self_efficacy})
    lines.append(f"Effect sizes ({labels['dPaired']})")
    lines.append("group              " + " ".join(f"Q{i:<7}" for i in items))
    for group in ("experimental", "control"):
        cells = " ".join(f"{_fmt(table[group].get(i)):<8}" for i in items)
        lines.append(f"{group:<18} {cells}")
    for title, stats in (("NASA-TLX", report.nasa_tlx), ("Satisfaction", report.satisfaction)):
        if not stats:
            continue
        lines.append("")
        lines.append(
            f"{title} (per item, group means; {labels['betweenT']}; {labels['dIndependent']})"
        )
        for s in stats:
            lines.append(
                f"  Q{s.item}: control {s.control_mean:.2f}±{s.control_sd:.2f}"
                f"  experimental {s.experimental_mean:.2f}±{s.experimental_sd:.2f}"
                f"  p = {_fmt(s.p)}  d = {_fmt(s.d)}"
            )
    if report.group_metrics:
        lines.append("")
        lines.append("Session metrics")
        for g in report.group_metrics:
            lines.append(
                f"  {g.group}: n={g.sessions}, task time {g.mean_task_time_s:.1f}±{g.sd_task_time_s:.1f}s,"
                f" interactions {g.mean_interaction_count:.2f}±{g.sd_interaction_count:.2f},"
                f" completion {g.completion_rate:.0%}"
            )
        for name, p in report.metrics_contrasts.items():
            lines.append(f"  between-group {name}: p = {_fmt(p)}")
    lines.append("")
    return "\n".join(lines)


def plot_data(report: StatsReport) -> dict[str, Any]:
    items = sorted({s.item for s in report.self_efficacy})
    data: dict[str, Any] = {"formulas": report.config.labels(), "selfEfficacy": {}}
    for group in GROUPS:
        rows = [s for s in report.self_efficacy if s.group == group]
        data["selfEfficacy"][group] = {
            "items": [s.item for s in rows],
            "preMeans": [s.pre_mean for s in rows],
            "preSds": [s.pre_sd for s in rows],
            "postMeans": [s.post_mean for s in rows],
            "postSds": [s.post_sd for s in rows],
            "p": [s.p for s in rows],
            "d": [s.d for s in rows],
        }
    data["effectSizes"] = {
        group: [table.get(i) for i in items]
        for group, table in report.effect_size_table().items()
    }
    for name, stats in (("nasaTlx", report.nasa_tlx), ("satisfaction", report.satisfaction)):
        data[name] = {
            "items": [s.item for s in stats],
            "controlMeans": [s.control_mean for s in stats],
            "controlSds": [s.control_sd for s in stats],
            "experimentalMeans": [s.experimental_mean for s in stats],
            "experimentalSds": [s.experimental_sd for s in stats],
            "p": [s.p for s in stats],
            "d": [s.d for s in stats],
        }
    return data


def _grouped_bars(ax, items, left, left_sd, right, right_sd, left_label, right_label):
    width = 0.38
    xs = range(len(items))
    ax.bar([x - width / 2 for x in xs], left, width, yerr=left_sd, capsize=3, label=left_label)
    ax.bar([x + width / 2 for x in xs], right, width, yerr=right_sd, capsize=3, label=right_label)
    ax.set_xticks(list(xs))
    ax.set_xticklabels([f"Q{i}" for i in items])
    ax.legend()


def render_figures(report: StatsReport, directory: str | Path) -> list[Path]:
    """Write the grouped-bar figures with SD whiskers; returns the file paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    labels = report.config.labels()
    written: list[Path] = []

    for group in GROUPS:
        rows = [s for s in report.self_efficacy if s.group == group]
        if not rows:
            continue
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        _grouped_bars(
            ax,
            [s.item for s in rows],
            [s.pre_mean for s in rows],
            [s.pre_sd for s in rows],
            [s.post_mean for s in rows],
            [s.post_sd for s in rows],
            "pre",
            "post",
        )
        ax.set_ylabel("score (1-5)")
        ax.set_title(f"Self-efficacy, {group} group")
        fig.text(0.01, 0.01, f"{labels['prepostT']}; {labels['dPaired']}", fontsize=7)
        path = directory / f"self_efficacy_{group}.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

    for name, title, stats in (
        ("cognitive_load", "Cognitive load (NASA-TLX)", report.nasa_tlx),
        ("satisfaction", "Satisfaction", report.satisfaction),
    ):
        if not stats:
            continue
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        _grouped_bars(
            ax,
            [s.item for s in stats],
            [s.control_mean for s in stats],
            [s.control_sd for s in stats],
            [s.experimental_mean for s in stats],
            [s.experimental_sd for s in stats],
            "control",
            "experimental",
        )
        ax.set_ylabel("score")
        ax.set_title(title)
        fig.text(0.01, 0.01, labels["betweenT"], fontsize=7)
        path = directory / f"{name}.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(path)
    return written


def write_report(report: StatsReport, directory: str | Path) -> list[Path]:
    """Write text, CSV tables, plot data, and figures into a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    text_path = directory / "report.txt"
    text_path.write_text(render_text(report), encoding="utf-8")
    written.append(text_path)

    items = sorted({s.item for s in report.self_efficacy})
    table = report.effect_size_table()
    effect_path = directory / "effect_sizes.csv"
    with open(effect_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["group"] + [f"Q{i}" for i in items])
        for group in ("experimental", "control"):
            writer.writerow([group] + [_fmt(table[group].get(i)) for i in items])
    written.append(effect_path)

    items_path = directory / "item_stats.csv"
    with open(items_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["item", "group", "pre_mean", "pre_sd", "post_mean", "post_sd", "t", "p", "d", "n"])
        for s in report.self_efficacy:
            writer.writerow(
                [
                    s.item,
                    s.group,
                    f"{s.pre_mean:.6f}",
                    f"{s.pre_sd:.6f}",
                    f"{s.post_mean:.6f}",
                    f"{s.post_sd:.6f}",
                    _fmt(s.t, 6),
                    _fmt(s.p, 6),
                    _fmt(s.d, 6),
                    len(s.pre_scores),
                ]
            )
    written.append(items_path)

    for name, stats in (("nasa_tlx", report.nasa_tlx), ("satisfaction", report.satisfaction)):
        if not stats:
            continue
        path = directory / f"{name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["item", "control_mean", "control_sd", "experimental_mean", "experimental_sd", "t", "p", "d"]
            )
            for s in stats:
                writer.writerow(
                    [
                        s.item,
                        f"{s.control_mean:.6f}",
                        f"{s.control_sd:.6f}",
                        f"{s.experimental_mean:.6f}",
                        f"{s.experimental_sd:.6f}",
                        _fmt(s.t, 6),
                        _fmt(s.p, 6),
                        _fmt(s.d, 6),
                    ]
                )
        written.append(path)

    if report.group_metrics:
        path = directory / "group_metrics.csv"
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["group", "sessions", "mean_task_time_s", "sd_task_time_s",
                 "mean_interaction_count", "sd_interaction_count", "completion_rate"]
            )
            for g in report.group_metrics:
                writer.writerow(
                    [
                        g.group,
                        g.sessions,
                        f"{g.mean_task_time_s:.6f}",
                        f"{g.sd_task_time_s:.6f}",
                        f"{g.mean_interaction_count:.6f}",
                        f"{g.sd_interaction_count:.6f}",
                        f"{g.completion_rate:.6f}",
                    ]
                )
        written.append(path)

    data_path = directory / "plot_data.json"
    data_path.write_text(json.dumps(plot_data(report), indent=2, sort_keys=True), encoding="utf-8")
    written.append(data_path)

    written.extend(render_figures(report, directory))
    return written
