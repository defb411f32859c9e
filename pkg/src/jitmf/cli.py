"""Command-line front end.

simulate -> run scripted incidents; pipeline -> parse + model a run;
query -> filter or correlate events; compare -> score against truth;
report -> scenario grid; serve -> HTTP API.

Exit codes: 0 success, 1 usage error, 2 processing failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .driver import SamplingStrategy
from .driverconfig import ConfigError, load_driver_config
from .knowledge import CorrelationMode, EmptySeed, KnowledgeModel, SeedEvent
from .metrics import MatchingCriteria, TimelineComparison
from .report import (
    BASELINE_MODEL_FILE,
    MODEL_FILE,
    CASE_PRESETS,
    CasePreset,
    build_report,
    case_preset_for,
    compare_run,
    run_pipeline,
)
from .simdevice.scenario import SCENARIO_PRESETS, run_scenario
from . import server as http_server

USAGE_EXIT = 1
FAILURE_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def parse_sampling(text: str) -> SamplingStrategy:
    """'always' or 'windowed:<active_s>:<period_s>'."""
    if text == "always":
        return SamplingStrategy.always()
    parts = text.split(":")
    if len(parts) == 3 and parts[0] == "windowed":
        try:
            return SamplingStrategy.windowed(float(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    raise argparse.ArgumentTypeError(f"bad sampling spec {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jitmf", description="Memory-dump driven timeline tooling")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run scripted incident scenarios")
    sim.add_argument("--scenario", required=True, choices=sorted(SCENARIO_PRESETS), help="scenario preset")
    sim.add_argument("--out", required=True, help="output root for run directories")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--runs", type=int, default=1, help="consecutive seeds starting at --seed")
    sim.add_argument("--sampling", type=parse_sampling, default=None)
    sim.add_argument("--acquisition", choices=("online", "offline"), default="online")
    sim.add_argument("--driver", action="append", default=[], help="driver config YAML (repeatable)")
    sim.add_argument("--scenario-id", default=None, help="override the run id prefix")
    sim.add_argument("--uninstrumented-fraction", type=float, default=None)
    sim.add_argument("--linger", type=float, default=None, help="seconds freed bytes stay carvable")
    sim.add_argument("--wal-cap", type=int, default=None)
    sim.add_argument("--cleanup-delete", type=int, default=None, help="end-of-run wipe size")

    pipe = sub.add_parser("pipeline", help="build super timelines and knowledge models")
    pipe.add_argument("run_dirs", nargs="+", metavar="RUN_DIR")

    query = sub.add_parser("query", help="filter or correlate events in a processed run")
    query.add_argument("run_dir", metavar="RUN_DIR")
    query.add_argument("--model", choices=("jitmf", "baseline"), default="jitmf")
    query.add_argument("--mode", choices=[m.value for m in CorrelationMode], default=None,
                       help="correlate with the seed flags instead of plain filtering")
    query.add_argument("--subject", default=None)
    query.add_argument("--keyword", action="append", default=[])
    query.add_argument("--event-type", default=None)
    query.add_argument("--source", default=None)
    query.add_argument("--granularity", choices=("fine", "coarse"), default=None)
    query.add_argument("--since", type=float, default=None, help="seconds")
    query.add_argument("--until", type=float, default=None, help="seconds")
    query.add_argument("--last-days", type=float, default=None,
                       help="only events within this many days of the run's end")
    query.add_argument("--limit", type=int, default=None)

    cmp_cmd = sub.add_parser("compare", help="score a processed run against ground truth")
    cmp_cmd.add_argument("run_dir", metavar="RUN_DIR")
    cmp_cmd.add_argument("--criteria", choices=("content_presence", "sent_to_subject", "chat_activity_for_subject"), default=None)
    cmp_cmd.add_argument("--mode", choices=[m.value for m in CorrelationMode], default=None)
    cmp_cmd.add_argument("--sources", choices=("jitmf", "baseline", "both"), default="both")

    rep = sub.add_parser("report", help="simulate and score a grid of scenarios")
    rep.add_argument("--out", required=True)
    rep.add_argument("--scenarios", default=",".join(sorted(CASE_PRESETS)), help="comma-separated preset ids")
    rep.add_argument("--seeds", default="0,1,2,3,4", help="comma-separated seeds")

    srv = sub.add_parser("serve", help="serve processed runs over HTTP")
    srv.add_argument("--root", required=True, help="directory containing run directories")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8787)
    srv.add_argument("--ui", default=None, help="static directory to serve at /")

    return parser


def _cmd_simulate(args) -> int:
    spec = SCENARIO_PRESETS[args.scenario]
    overrides = {}
    if args.scenario_id is not None:
        overrides["scenario_id"] = args.scenario_id
    if args.uninstrumented_fraction is not None:
        overrides["uninstrumented_fraction"] = args.uninstrumented_fraction
    if args.linger is not None:
        overrides["ephemeral_linger"] = args.linger
    if args.wal_cap is not None:
        overrides["wal_cap"] = args.wal_cap
    if args.cleanup_delete is not None:
        overrides["cleanup_delete"] = args.cleanup_delete
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    drivers = [load_driver_config(path) for path in args.driver] or None
    for seed in range(args.seed, args.seed + args.runs):
        artifacts = run_scenario(
            spec,
            seed=seed,
            out_dir=args.out,
            drivers=drivers,
            sampling=args.sampling,
            acquisition=args.acquisition,
        )
        print(artifacts.run_dir)
    return 0


def _cmd_pipeline(args) -> int:
    for run_dir in args.run_dirs:
        result = run_pipeline(run_dir)
        derived = result.derived_counts.get("jitmf", 0)
        print(
            f"{result.run_id}: jitmf={result.event_counts['jitmf']} "
            f"baseline={result.event_counts['baseline']} derived={derived}"
        )
    return 0


def _print_events(events) -> None:
    for e in events:
        print(
            "\t".join(
                (
                    "%.6f" % e.time,
                    e.source,
                    e.event_type,
                    e.subject,
                    e.object,
                    e.granularity,
                    "1" if e.synthetic else "0",
                )
            )
        )


def _cmd_query(args) -> int:
    run_dir = Path(args.run_dir)
    model_path = run_dir / (MODEL_FILE if args.model == "jitmf" else BASELINE_MODEL_FILE)
    with KnowledgeModel.open(model_path) as model:
        since = args.since
        if args.last_days is not None:
            cutoff = model.clock_end_ms / 1000.0 - args.last_days * 86400.0
            since = cutoff if since is None else max(since, cutoff)
        if args.mode:
            seed = SeedEvent(
                subject=args.subject or "",
                keywords=tuple(args.keyword),
                event_type=args.event_type or "",
            )
            events = model.correlate(seed, args.mode)
            if since is not None:
                events = [e for e in events if e.time >= since]
            if args.until is not None:
                events = [e for e in events if e.time <= args.until]
            if args.limit is not None:
                events = events[: args.limit]
        else:
            events = model.events(
                subject=args.subject,
                keywords=args.keyword or None,
                event_type=args.event_type,
                source=args.source,
                granularity=args.granularity,
                since=since,
                until=args.until,
                limit=args.limit,
            )
    _print_events(events)
    return 0


def _format_comparison(label: str, comp: TimelineComparison) -> str:
    fr = TimelineComparison.format_ratio
    return (
        f"{label}: criteria={comp.criteria.kind} generated={comp.generated_total} "
        f"truth={comp.truth_total} matched={comp.matched} "
        f"precision={fr(comp.precision)} recall={fr(comp.recall)} "
        f"jaccard={'%.6f' % comp.jaccard} kendall_raw={comp.kendall_raw} "
        f"dev_mean_s={'%.6f' % comp.deviation.mean_s} dev_max_s={'%.6f' % comp.deviation.max_s}"
    )


def _cmd_compare(args) -> int:
    preset = case_preset_for(args.run_dir)
    if args.criteria:
        preset = CasePreset(preset.seed, preset.mode, MatchingCriteria(args.criteria))
    comps = compare_run(args.run_dir, sources=args.sources, mode=args.mode, preset=preset)
    for label in ("jitmf", "baseline"):
        if label in comps:
            print(_format_comparison(label, comps[label]))
    return 0


def _cmd_report(args) -> int:
    scenario_ids = tuple(s for s in args.scenarios.split(",") if s)
    seeds = tuple(int(s) for s in args.seeds.split(",") if s)
    unknown = [s for s in scenario_ids if s not in SCENARIO_PRESETS]
    if unknown:
        raise ValueError(f"unknown scenarios: {', '.join(unknown)}")
    result = build_report(args.out, scenario_ids=scenario_ids, seeds=seeds)
    print(result.summary_text.read_text(encoding="utf-8"), end="")
    print(f"rows: {result.per_run_csv}")
    print(f"summary: {result.summary_csv}")
    return 0


def _cmd_serve(args) -> int:
    http_server.serve(args.root, host=args.host, port=args.port, static_dir=args.ui)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "pipeline": _cmd_pipeline,
    "query": _cmd_query,
    "compare": _cmd_compare,
    "report": _cmd_report,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    try:
        return _COMMANDS[args.command](args)
    except (EmptySeed, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE_EXIT


if __name__ == "__main__":
    sys.exit(main())
