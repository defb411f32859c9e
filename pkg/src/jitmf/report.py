"""End-to-end pipeline and case-study reporting.

One run directory flows through: parse artifacts into two super timelines
(with and without memory-dump evidence), load each into its own knowledge
model, derive interception events, then score seeded correlations against
ground truth. The report aggregates that over scenarios and seeds.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass
from pathlib import Path

from .knowledge import CorrelationMode, KnowledgeModel, SeedEvent, populate_model
from .metrics import (
    MatchingCriteria,
    TimelineComparison,
    compare_timeline,
    load_ground_truth,
)
from .simdevice.scenario import (
    ATTACK_PEER,
    INTERCEPT_PEER,
    SCENARIO_PRESETS,
    ScenarioSpec,
    run_scenario,
)
from .sources import build_super_timeline, write_super_timeline

TIMELINE_FILE = "super_timeline.csv"
BASELINE_TIMELINE_FILE = "super_timeline_baseline.csv"
MODEL_FILE = "knowledge.db"
BASELINE_MODEL_FILE = "knowledge_baseline.db"

REPORT_COLUMNS = (
    "scenario",
    "seed",
    "source",
    "mode",
    "criteria",
    "generated",
    "truth",
    "matched",
    "precision",
    "recall",
    "jaccard",
    "kendall_raw",
    "kendall_norm",
    "dev_mean_s",
    "dev_stdev_s",
    "dev_max_s",
)


@dataclass(frozen=True)
class CasePreset:
    """How an examiner seeds and scores one incident class."""

    seed: SeedEvent
    mode: CorrelationMode
    criteria: MatchingCriteria


_CRIME_SEED = SeedEvent(
    subject=ATTACK_PEER, keywords=("Sending_Attack",), event_type="message_sent"
)
_INTERCEPT_SEED = SeedEvent(
    subject=INTERCEPT_PEER, keywords=("Confidential",), event_type="chat_intercepted"
)

CASE_PRESETS: dict[str, CasePreset] = {
    "A": CasePreset(_CRIME_SEED, CorrelationMode.SUBJECT, MatchingCriteria("content_presence")),
    "B": CasePreset(_CRIME_SEED, CorrelationMode.SUBJECT, MatchingCriteria("sent_to_subject")),
    "C": CasePreset(_CRIME_SEED, CorrelationMode.SUBJECT, MatchingCriteria("sent_to_subject")),
    "D": CasePreset(_INTERCEPT_SEED, CorrelationMode.SUBJECT, MatchingCriteria("chat_activity_for_subject")),
    "E": CasePreset(_INTERCEPT_SEED, CorrelationMode.SUBJECT, MatchingCriteria("chat_activity_for_subject")),
    "F": CasePreset(_INTERCEPT_SEED, CorrelationMode.SUBJECT, MatchingCriteria("chat_activity_for_subject")),
}


def case_preset_for(run_dir: Path | str) -> CasePreset:
    """Pick the scoring preset recorded for a run, falling back by incident kind."""
    manifest = json.loads((Path(run_dir) / "run.json").read_text(encoding="utf-8"))
    scenario = manifest.get("scenario", {})
    sid = scenario.get("scenario_id", "")
    if sid in CASE_PRESETS:
        return CASE_PRESETS[sid]
    if scenario.get("attack_kind") == "interception":
        return CASE_PRESETS["D"]
    if scenario.get("app_model") == "cloud_messenger":
        return CASE_PRESETS["A"]
    return CASE_PRESETS["B"]


@dataclass
class PipelineResult:
    run_dir: Path
    run_id: str
    timeline_path: Path
    baseline_timeline_path: Path
    model_path: Path
    baseline_model_path: Path
    event_counts: dict[str, int]
    derived_counts: dict[str, int]


def run_pipeline(run_dir: Path | str, *, derive: bool = True) -> PipelineResult:
    """Artifacts -> two super timelines -> two knowledge models."""
    run_dir = Path(run_dir)
    counts: dict[str, int] = {}
    derived: dict[str, int] = {}
    paths = {}
    for label, include in (("jitmf", True), ("baseline", False)):
        timeline = build_super_timeline(run_dir, include_jitmf=include)
        timeline_path = run_dir / (TIMELINE_FILE if include else BASELINE_TIMELINE_FILE)
        write_super_timeline(timeline_path, timeline.entries)
        model_path = run_dir / (MODEL_FILE if include else BASELINE_MODEL_FILE)
        model = populate_model(model_path, timeline.run_id, timeline.clock_end_ms, timeline.entries)
        if derive:
            derived[label] = len(model.derive_interception_events())
        counts[label] = model.event_count()
        model.close()
        paths[label] = (timeline_path, model_path)

    manifest = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
    return PipelineResult(
        run_dir=run_dir,
        run_id=manifest["run_id"],
        timeline_path=paths["jitmf"][0],
        baseline_timeline_path=paths["baseline"][0],
        model_path=paths["jitmf"][1],
        baseline_model_path=paths["baseline"][1],
        event_counts=counts,
        derived_counts=derived,
    )


def compare_run(
    run_dir: Path | str,
    *,
    sources: str = "both",
    mode: CorrelationMode | str | None = None,
    preset: CasePreset | None = None,
) -> dict[str, TimelineComparison]:
    """Score one processed run. ``sources`` picks which models to score."""
    run_dir = Path(run_dir)
    if sources not in ("jitmf", "baseline", "both"):
        raise ValueError(f"unknown sources selector {sources!r}")
    preset = preset or case_preset_for(run_dir)
    mode = CorrelationMode(mode) if mode is not None else preset.mode
    truth = load_ground_truth(run_dir / "ground_truth.jsonl")

    wanted = ("jitmf", "baseline") if sources == "both" else (sources,)
    out: dict[str, TimelineComparison] = {}
    for label in wanted:
        model_path = run_dir / (MODEL_FILE if label == "jitmf" else BASELINE_MODEL_FILE)
        with KnowledgeModel.open(model_path) as model:
            correlated = model.correlate(preset.seed, mode)
        out[label] = compare_timeline(correlated, truth, preset.criteria)
    return out


def _comparison_row(scenario: str, seed: int, source: str, mode: str, comp: TimelineComparison) -> dict:
    return {
        "scenario": scenario,
        "seed": seed,
        "source": source,
        "mode": mode,
        "criteria": comp.criteria.kind,
        "generated": comp.generated_total,
        "truth": comp.truth_total,
        "matched": comp.matched,
        "precision": TimelineComparison.format_ratio(comp.precision),
        "recall": TimelineComparison.format_ratio(comp.recall),
        "jaccard": "%.6f" % comp.jaccard,
        "kendall_raw": comp.kendall_raw,
        "kendall_norm": "%.6f" % comp.kendall_normalized,
        "dev_mean_s": "%.6f" % comp.deviation.mean_s,
        "dev_stdev_s": "%.6f" % comp.deviation.stdev_s,
        "dev_max_s": "%.6f" % comp.deviation.max_s,
    }


@dataclass
class ReportResult:
    out_root: Path
    rows: list[dict]
    per_run_csv: Path
    summary_csv: Path
    summary_text: Path


def build_report(
    out_root: Path | str,
    *,
    scenario_ids: tuple[str, ...] = tuple(SCENARIO_PRESETS),
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4),
    specs: dict[str, ScenarioSpec] | None = None,
) -> ReportResult:
    """Simulate, process, and score a grid of scenarios and seeds."""
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    specs = specs or SCENARIO_PRESETS
    rows: list[dict] = []
    for sid in scenario_ids:
        spec = specs[sid]
        for seed in seeds:
            artifacts = run_scenario(spec, seed=seed, out_dir=out_root)
            run_pipeline(artifacts.run_dir)
            comps = compare_run(artifacts.run_dir, sources="both")
            preset = case_preset_for(artifacts.run_dir)
            for source, comp in comps.items():
                rows.append(_comparison_row(sid, seed, source, preset.mode.value, comp))

    per_run_csv = out_root / "report_runs.csv"
    with open(per_run_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

    summary_rows = _summarize(rows)
    summary_csv = out_root / "report_summary.csv"
    with open(summary_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=("scenario", "source", "runs", "precision", "recall", "jaccard", "kendall_raw", "dev_max_s"),
            lineterminator="\n",
        )
        writer.writeheader()
        writer.writerows(summary_rows)

    summary_text = out_root / "report.txt"
    summary_text.write_text(_render_table(summary_rows), encoding="utf-8")
    return ReportResult(out_root, rows, per_run_csv, summary_csv, summary_text)


def _mean_of(rows: list[dict], key: str) -> str:
    values = [float(r[key]) for r in rows if r[key] != "-"]
    return "%.6f" % statistics.mean(values) if values else "-"


def _summarize(rows: list[dict]) -> list[dict]:
    keys = sorted({(r["scenario"], r["source"]) for r in rows}, key=lambda k: (k[0], k[1]))
    summary = []
    for scenario, source in keys:
        group = [r for r in rows if r["scenario"] == scenario and r["source"] == source]
        summary.append(
            {
                "scenario": scenario,
                "source": source,
                "runs": len(group),
                "precision": _mean_of(group, "precision"),
                "recall": _mean_of(group, "recall"),
                "jaccard": _mean_of(group, "jaccard"),
                "kendall_raw": _mean_of(group, "kendall_raw"),
                "dev_max_s": _mean_of(group, "dev_max_s"),
            }
        )
    return summary


def _render_table(summary_rows: list[dict]) -> str:
    header = ("scenario", "source", "runs", "precision", "recall", "jaccard", "kendall_raw", "dev_max_s")
    table = [header] + [tuple(str(r[k]) for k in header) for r in summary_rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for i, row in enumerate(table):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
