"""Acceptance gate: the headline behaviours, checked at full scale.

Each test covers one numbered claim and reports a PASS/FAIL line through the
terminal-summary hook in conftest. The seeded grids are shared module
fixtures so the timing criterion measures the real cost of all fifty runs.
"""

import dataclasses
import functools
import time

import pytest

import _properties as props
from jitmf.driver import SamplingStrategy
from jitmf.knowledge import KnowledgeModel, SeedEvent
from jitmf.metrics import MatchingCriteria, TruthEvent, compare_timeline
from jitmf.report import MODEL_FILE, build_report, compare_run, run_pipeline
from jitmf.simdevice import SCENARIO_PRESETS, run_scenario
from jitmf.sources import TimelineEntry, parse_wal
from jitmf.knowledge import populate_model

SEED_COUNT = 50
MODES = ("subject", "object", "event_type")

RESULTS: list[tuple[int, str, bool]] = []


def criterion(number: int, title: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                out = fn(*args, **kwargs)
            except BaseException:
                RESULTS.append((number, title, False))
                raise
            RESULTS.append((number, title, True))
            return out

        return wrapper

    return deco


@pytest.fixture(scope="module")
def crime_grid(tmp_path_factory):
    """Fifty seeded crime-proxy runs per sampling strategy, fully scored."""
    root = tmp_path_factory.mktemp("crime_grid")
    samplings = {
        "windowed": SamplingStrategy.windowed(1.0, 5.0),
        "always": SamplingStrategy.always(),
    }
    runs: list[dict] = []
    started = time.monotonic()
    for seed in range(SEED_COUNT):
        for label, sampling in samplings.items():
            artifacts = run_scenario(
                SCENARIO_PRESETS["A"], seed=seed, out_dir=root / label, sampling=sampling
            )
            run_pipeline(artifacts.run_dir)
            scores = {mode: compare_run(artifacts.run_dir, mode=mode) for mode in MODES}
            runs.append({"seed": seed, "sampling": label, "scores": scores})
    elapsed = time.monotonic() - started
    return runs, elapsed


@pytest.fixture(scope="module")
def intercept_grid(tmp_path_factory):
    """Fifty seeded interception runs per delegation-knob setting."""
    root = tmp_path_factory.mktemp("intercept_grid")
    runs: dict[float, list[dict]] = {}
    for knob, label in ((0.5, "half"), (0.0, "full")):
        spec = dataclasses.replace(SCENARIO_PRESETS["D"], uninstrumented_fraction=knob)
        rows = []
        for seed in range(SEED_COUNT):
            artifacts = run_scenario(spec, seed=seed, out_dir=root / label)
            run_pipeline(artifacts.run_dir)
            scores = {mode: compare_run(artifacts.run_dir, mode=mode) for mode in MODES}
            rows.append({"seed": seed, "scores": scores})
        runs[knob] = rows
    return runs


@criterion(1, "crime-proxy pattern: baseline blind, dumps recover deleted sends")
def test_crime_proxy_pattern(crime_grid) -> None:
    runs, elapsed = crime_grid
    assert elapsed < 60.0, f"50-seed grid took {elapsed:.1f}s"
    for run in runs:
        for mode in ("subject", "object"):
            jit = run["scores"][mode]["jitmf"]
            base = run["scores"][mode]["baseline"]
            where = f"seed {run['seed']} {run['sampling']} {mode}"

            assert base.recall == 0.0, where
            assert base.matched == 0, where
            assert jit.precision == 1.0, where
            assert jit.recall > base.recall, where  # the ordering, every run
            if run["sampling"] == "always":
                assert jit.recall == 1.0, where
            else:
                assert jit.recall >= 0.9, where
                assert abs(jit.recall - 1.0) <= 0.1, where


@criterion(2, "event-type correlation drowns: recall 1 at precision 0.01")
def test_event_type_noise_floor(tmp_path) -> None:
    attack_contents = [f"Sending_Attack_{i}" for i in range(3)]
    truth = [
        TruthEvent(ts_ms=(i + 1) * 60_000, event_type="message_sent", subject="Alice",
                   object=content, attack=True)
        for i, content in enumerate(attack_contents)
    ]
    entries = [
        TimelineEntry((i + 1) * 60.0, "jitmf", "jitmf", "message_sent", "Alice",
                      content, "fine", f"d:{i}")
        for i, content in enumerate(attack_contents)
    ]
    entries += [
        TimelineEntry(200.0 + i, "message_db", "message_db", "message_sent", "Bob",
                      f"routine_{i}", "fine", f"m:{i}")
        for i in range(297)
    ]
    model = populate_model(tmp_path / "noise.db", "noise-floor", 0, entries)
    correlated = model.correlate(SeedEvent(event_type="message_sent"), "event_type")
    model.close()
    assert len(correlated) == 300

    comp = compare_timeline(correlated, truth, MatchingCriteria("content_presence"))
    assert comp.matched == 3
    assert comp.recall == 1.0
    assert comp.precision == 0.01
    assert round(comp.precision, 2) == 0.01


@criterion(3, "interception detection degrades gracefully with delegation")
def test_interception_aggregation(intercept_grid) -> None:
    for knob, rows in intercept_grid.items():
        for row in rows:
            for mode in MODES:
                base = row["scores"][mode]["baseline"]
                assert base.recall == 0.0, f"seed {row['seed']} knob {knob} {mode}"
                assert base.matched == 0

    full = [row["scores"]["subject"]["jitmf"].recall for row in intercept_grid[0.0]]
    assert all(r == 1.0 for r in full)

    half = [row["scores"]["subject"]["jitmf"].recall for row in intercept_grid[0.5]]
    assert sum(half) / len(half) >= 0.45


@criterion(4, "matched events keep order; deviation within the sampling period")
def test_sequence_fidelity(crime_grid, intercept_grid) -> None:
    instrumented = []
    for run in crime_grid[0]:
        for mode in MODES:
            instrumented.extend(run["scores"][mode].values())
    instrumented.extend(
        comp
        for row in intercept_grid[0.0]
        for mode in MODES
        for comp in row["scores"][mode].values()
    )
    # delegated acquisitions surface objects only at a later instrumented
    # burst, so the sampling-period bound cannot apply to them; ordering and
    # causality still must
    degraded = [
        comp
        for row in intercept_grid[0.5]
        for mode in MODES
        for comp in row["scores"][mode].values()
    ]
    assert instrumented and degraded
    for comp in instrumented + degraded:
        assert comp.kendall_raw == 0
        for pair in comp.pairs:
            assert pair.generated.time >= pair.truth.time
    for comp in instrumented:
        assert comp.deviation.max_s <= 5.0


@criterion(5, "a capped journal keeps exactly the last twenty deletions")
def test_wal_ephemerality(tmp_path) -> None:
    spec = dataclasses.replace(SCENARIO_PRESETS["A"], scenario_id="A-wipe", cleanup_delete=250)
    assert spec.wal_cap == 20
    artifacts = run_scenario(spec, seed=0, out_dir=tmp_path)
    result = parse_wal(artifacts.run_dir / "messages.db-wal")
    assert result.reconciles()
    deleted = [e for e in result.entries if e.event_type == "message_deleted"]
    assert len(deleted) == 20
    assert len({e.object for e in deleted}) == 20
    assert len(result.entries) == 20  # nothing but deletions survives the wipe


@criterion(6, "property suites hold at acceptance scale")
def test_property_suites(tmp_path, a_run) -> None:
    assert props.check_round_trip(10_000, seed=606) == 10_000
    for seed in range(10):
        props.check_planted_carving(seed)
    for seed in range(10):
        props.check_online_offline_equivalence(tmp_path / f"eq{seed}", seed)
    for seed in range(20):
        props.check_merge_conservation(seed)
    props.check_kendall_brute_force(707, cases=400)
    for seed in range(10):
        props.check_derive_window_monotonicity(tmp_path / f"dw{seed}", seed)

    # correlation is a pure query: asking twice changes nothing
    with KnowledgeModel.open(a_run / MODEL_FILE) as model:
        seed_event = SeedEvent(
            subject="Alice", keywords=("Sending_Attack",), event_type="message_sent"
        )
        before = model.event_count()
        for mode in MODES:
            assert model.correlate(seed_event, mode) == model.correlate(seed_event, mode)
        assert model.event_count() == before


@criterion(7, "one (scenario, seed) pair always reproduces the same bytes")
def test_determinism(tmp_path) -> None:
    for sid in ("A", "D"):
        first = build_report(tmp_path / sid / "one", scenario_ids=(sid,), seeds=(7,))
        second = build_report(tmp_path / sid / "two", scenario_ids=(sid,), seeds=(7,))
        assert first.per_run_csv.read_bytes() == second.per_run_csv.read_bytes()
        run_name = f"{sid}-s00007"
        for name in ("ground_truth.jsonl", "super_timeline.csv", "super_timeline_baseline.csv"):
            left = (tmp_path / sid / "one" / run_name / name).read_bytes()
            right = (tmp_path / sid / "two" / run_name / name).read_bytes()
            assert left == right, f"{sid} {name}"
