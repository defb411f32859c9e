"""Scenario specs and the run orchestrator.

A scenario pairs an app model with an incident kind and a handful of knobs
(noise volume, gap ranges, residue linger, delegation fraction, journal cap,
end-of-run wipe size). ``run_scenario`` executes the scripted incident on a
fresh simulated process with the requested drivers installed and writes the
full artifact set under ``<out_dir>/<scenario_id>-s<seed>``.

All pacing comes from one seeded RNG in integer milliseconds, so a given
(scenario, seed) pair reproduces byte-identical artifacts.
"""

from __future__ import annotations

import random
import string
from dataclasses import asdict, dataclass
from pathlib import Path

from ..driver import DriverEngine, DriverSpec, FireKind, SamplingStrategy
from ..driverconfig import driver_config_doc
from .apps import PROFILES, SimApp
from .artifacts import (
    DeviceArtifacts,
    FilestatTracker,
    GroundTruthLog,
    LogcatLog,
    MessageStore,
    write_filestat,
    write_ground_truth,
    write_logcat,
    write_manifest,
    write_message_db,
    write_wal,
)
from .presets import ATTACK_KINDS, build_driver
from .process import SimProcess

ATTACK_PEER = "Alice"
INTERCEPT_PEER = "CEO"
NOISE_PEERS = ("Bob", "Carol", "Dave", "Erin", "Frank", "Grace")


@dataclass(frozen=True)
class ScenarioSpec:
    scenario_id: str
    app_model: str
    attack_kind: str
    attack_iterations: int = 3
    noise_before: int = 6
    noise_after: int = 6
    ephemeral_linger: float = 2.0
    uninstrumented_fraction: float = 0.0
    wal_cap: int = 20
    cleanup_delete: int = 0

    def validate(self) -> None:
        if self.app_model not in PROFILES:
            raise ValueError(f"unknown app model {self.app_model!r}")
        if self.attack_kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.attack_kind!r}")
        if self.attack_iterations < 1:
            raise ValueError("attack_iterations must be positive")
        if self.noise_before < 0 or self.noise_after < 0:
            raise ValueError("noise counts cannot be negative")
        if self.ephemeral_linger <= 0:
            raise ValueError("ephemeral_linger must be positive")
        if not 0.0 <= self.uninstrumented_fraction <= 1.0:
            raise ValueError("uninstrumented_fraction must be in [0, 1]")
        if self.wal_cap < 1:
            raise ValueError("wal_cap must be positive")
        if self.cleanup_delete < 0:
            raise ValueError("cleanup_delete cannot be negative")


# Case-study presets. Residue linger is 6s everywhere so every flush retry
# still finds live bytes; the bridge model delegates half its sync work.
SCENARIO_PRESETS: dict[str, ScenarioSpec] = {
    "A": ScenarioSpec("A", "cloud_messenger", "crime_proxy", ephemeral_linger=6.0),
    "B": ScenarioSpec("B", "local_messenger", "crime_proxy", ephemeral_linger=6.0),
    "C": ScenarioSpec(
        "C", "sms_bridge", "crime_proxy", ephemeral_linger=6.0, uninstrumented_fraction=0.5
    ),
    "D": ScenarioSpec("D", "cloud_messenger", "interception", ephemeral_linger=6.0),
    "E": ScenarioSpec("E", "local_messenger", "interception", ephemeral_linger=6.0),
    "F": ScenarioSpec(
        "F", "sms_bridge", "interception", ephemeral_linger=6.0, uninstrumented_fraction=0.5
    ),
}


def run_id_for(spec: ScenarioSpec, seed: int) -> str:
    return f"{spec.scenario_id}-s{seed:05d}"


def _letters(rng: random.Random, lo: int, hi: int) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(lo, hi)))


def _noise_action(app: SimApp, rng: random.Random, index: int) -> None:
    """Background chatter. The bridge model's noise is inbound texts; the
    messenger models generate outbound messages."""
    peer = NOISE_PEERS[index % len(NOISE_PEERS)]
    content = f"Noise_{_letters(rng, 10, 100)}"
    if app.profile.model == "sms_bridge":
        app.receive_message(peer, content)
    else:
        app.send_message(peer, content)


def _crime_proxy_script(app: SimApp, process: SimProcess, spec: ScenarioSpec, rng: random.Random) -> None:
    process.advance(1000)
    app.app_open()
    noise_index = 0
    for _ in range(spec.noise_before):
        process.advance_by(rng.randint(3000, 8000))
        _noise_action(app, rng, noise_index)
        noise_index += 1
    for i in range(1, spec.attack_iterations + 1):
        process.advance_by(rng.randint(10000, 20000))
        row_id = app.send_message(ATTACK_PEER, f"Sending_Attack_{i}", attack=True)
        process.advance_by(100)
        app.delete_message(row_id)
    for _ in range(spec.noise_after):
        process.advance_by(rng.randint(3000, 8000))
        _noise_action(app, rng, noise_index)
        noise_index += 1
    process.advance_by(10000)
    app.app_close()
    if spec.cleanup_delete:
        _cleanup_wipe(app, process, spec.cleanup_delete)


def _cleanup_wipe(app: SimApp, process: SimProcess, count: int) -> None:
    """Anti-forensic wipe after the last clean shutdown.

    Backfills the store if it holds fewer rows than the wipe size, then
    deletes everything oldest-first. No checkpoint follows, so the journal
    ends holding the final ``wal_cap`` delete deltas.
    """
    missing = count - len(app.store.rows)
    for i in range(max(0, missing)):
        process.advance_by(10)
        app.receive_message(NOISE_PEERS[i % len(NOISE_PEERS)], f"Wipe_{i:03d}")
    doomed = [r.id for r in app.store.ordered_rows()][:count]
    for row_id in doomed:
        process.advance_by(10)
        app.delete_message(row_id)


def _interception_script(app: SimApp, process: SimProcess, spec: ScenarioSpec, rng: random.Random) -> None:
    process.advance(1000)
    app.app_open()
    noise_index = 0
    for _ in range(spec.noise_before):
        process.advance_by(rng.randint(3000, 8000))
        _noise_action(app, rng, noise_index)
        noise_index += 1
    per_gap = spec.noise_after // spec.attack_iterations
    placed_after = 0
    for _ in range(spec.attack_iterations):
        process.advance_by(30000)
        app.receive_message(INTERCEPT_PEER, f"Confidential_{_letters(rng, 12, 24)}")
        process.advance_by(rng.randint(2000, 5000))
        app.send_message(INTERCEPT_PEER, f"Confidential_{_letters(rng, 12, 24)}")
        process.advance_by(rng.randint(2000, 5000))
        app.load_chat(INTERCEPT_PEER, intercept=True)
        for _ in range(per_gap):
            process.advance_by(rng.randint(3000, 8000))
            _noise_action(app, rng, noise_index)
            noise_index += 1
            placed_after += 1
    for _ in range(spec.noise_after - placed_after):
        process.advance_by(rng.randint(3000, 8000))
        _noise_action(app, rng, noise_index)
        noise_index += 1
    process.advance_by(10000)
    app.app_close()


def run_scenario(
    spec: ScenarioSpec,
    *,
    seed: int,
    out_dir: Path | str,
    drivers: list[DriverSpec] | None = None,
    sampling: SamplingStrategy | None = None,
    acquisition: str = "online",
) -> DeviceArtifacts:
    """Execute one scripted incident and persist every artifact it leaves."""
    spec.validate()
    run_id = run_id_for(spec, seed)
    run_dir = Path(out_dir) / run_id
    run_dir.mkdir(parents=True, exist_ok=True)

    process = SimProcess(run_id, run_dir, linger_ms=round(spec.ephemeral_linger * 1000))
    if drivers is None:
        drivers = [build_driver(spec.app_model, spec.attack_kind, sampling=sampling, acquisition=acquisition)]
    engine = DriverEngine(process)
    for driver in drivers:
        engine.init_driver(driver)

    rng = random.Random(seed)
    store = MessageStore(spec.wal_cap)
    logcat = LogcatLog()
    filestat = FilestatTracker()
    truth = GroundTruthLog()
    app = SimApp(
        process,
        store,
        logcat,
        filestat,
        truth,
        rng,
        spec.app_model,
        uninstrumented_fraction=spec.uninstrumented_fraction,
    )

    script = _crime_proxy_script if spec.attack_kind == "crime_proxy" else _interception_script
    script(app, process, spec, rng)
    process.drain(slack_ms=round(spec.ephemeral_linger * 1000))
    engine.teardown_all()
    process.close()

    artifacts = DeviceArtifacts(run_dir)
    write_message_db(artifacts.message_db_path, store)
    write_wal(artifacts.wal_path, store)
    write_logcat(artifacts.logcat_path, logcat)
    write_filestat(artifacts.filestat_path, filestat)
    write_ground_truth(artifacts.ground_truth_path, truth)

    stats: dict[str, dict[str, int]] = {}
    for driver_id, _, outcome in engine.outcomes:
        entry = stats.setdefault(
            driver_id, {"dumped": 0, "records": 0, "suppressed_predicate": 0, "suppressed_sampling": 0}
        )
        if outcome.kind is FireKind.DUMPED:
            entry["dumped"] += 1
            entry["records"] += outcome.record_count
        elif outcome.kind is FireKind.SUPPRESSED_BY_PREDICATE:
            entry["suppressed_predicate"] += 1
        else:
            entry["suppressed_sampling"] += 1

    manifest = {
        "run_id": run_id,
        "seed": seed,
        "scenario": asdict(spec),
        "clock_end_ms": process.clock_ms,
        "drivers": [driver_config_doc(d) for d in drivers],
        "driver_stats": stats,
        "driver_errors": [
            {"driver_id": d, "at_ms": at, "error": msg} for d, at, msg in engine.errors
        ],
        "invocations": {f"{level}:{name}": n for (level, name), n in sorted(process.invocations.items())},
        "hook_firings": {f"{level}:{name}": n for (level, name), n in sorted(process.hook_firings.items())},
    }
    artifacts.manifest = manifest
    write_manifest(artifacts.manifest_path, manifest)
    return artifacts
