"""Simulated device: memory lifecycle, app behaviour, scenario artifacts."""

import json
import random

import pytest

from jitmf.carver import DEFAULT_REGISTRY, carve_objects
from jitmf.runtime import PermissionDenied, UnmappedAddress
from jitmf.simdevice import (
    SCENARIO_PRESETS,
    FilestatTracker,
    GroundTruthLog,
    LogcatLog,
    MessageStore,
    SimApp,
    SimProcess,
    run_scenario,
)
from jitmf.simdevice.apps import FLUSH_OFFSETS_MS

MSG = DEFAULT_REGISTRY.get("cloud_message")
FIELDS = {"peer": "Alice", "content": "payload", "sent": True, "ts": 1}


# -- process memory ----------------------------------------------------------


def test_read_memory_errors(process) -> None:
    heap = process.heap
    assert process.read_memory(heap.start, 0) == b""
    with pytest.raises(ValueError):
        process.read_memory(heap.start, -1)
    with pytest.raises(UnmappedAddress):
        process.read_memory(0x1, 4)
    with pytest.raises(UnmappedAddress):  # read crossing the segment end
        process.read_memory(heap.end - 2, 8)
    assert process.set_memory_permissions(heap.start, "---")
    with pytest.raises(PermissionDenied):
        process.read_memory(heap.start, 4)
    assert process.set_memory_permissions(heap.start, "rw-")
    process.read_memory(heap.start, 4)
    assert not process.set_memory_permissions(heap.start, "rwxx")
    assert not process.set_memory_permissions(0xDEAD, "r--")


def test_clock_only_moves_forward(process) -> None:
    process.advance(500)
    with pytest.raises(ValueError):
        process.advance(499)
    with pytest.raises(ValueError):
        process.schedule(499, lambda: None)


def test_scheduled_events_run_in_order(process) -> None:
    seen: list[tuple[int, str]] = []
    process.schedule(300, lambda: seen.append((process.clock_ms, "b")))
    process.schedule(100, lambda: seen.append((process.clock_ms, "a")))
    process.schedule(300, lambda: seen.append((process.clock_ms, "c")))
    process.advance(1000)
    assert seen == [(100, "a"), (300, "b"), (300, "c")]


def test_freed_object_lingers_then_zeroes(process) -> None:
    """Dead bytes stay carvable for the linger window, then vanish."""
    obj = process.allocate_object("cloud_message", FIELDS)
    process.free_object(obj, linger_ms=2000)
    assert process.live_objects("cloud_message") == []

    process.advance(1999)
    heap = process.read_memory(process.heap.start, process.heap.size)
    assert carve_objects(heap, MSG) == [obj.address - process.heap.start]

    process.advance(2000)
    heap = process.read_memory(process.heap.start, process.heap.size)
    assert carve_objects(heap, MSG) == []


def test_double_free_is_noop(process) -> None:
    obj = process.allocate_object("cloud_message", FIELDS)
    process.free_object(obj, linger_ms=100)
    freed_at = obj.freed_at
    process.advance(50)
    process.free_object(obj, linger_ms=100)
    assert obj.freed_at == freed_at
    process.advance(200)
    assert obj.zeroed


# -- message store / WAL -----------------------------------------------------


def test_wal_records_before_image() -> None:
    store = MessageStore()
    rid = store.insert(1000, "received", "Bob", "hello")
    assert store.delete(rid, 2000)
    assert not store.delete(rid, 2100)  # already gone
    assert [r.id for r in store.ordered_rows()] == []
    deletes = [d for d in store.wal if d.deleted_flag]
    assert len(deletes) == 1
    assert deletes[0].content == "hello"
    assert deletes[0].id == rid


def test_wal_cap_keeps_most_recent() -> None:
    store = MessageStore(wal_cap=5)
    for i in range(12):
        store.insert(i * 10, "received", "Bob", f"m{i}")
    assert len(store.wal) == 5
    assert [d.content for d in store.wal] == [f"m{i}" for i in range(7, 12)]


def test_checkpoint_clears_wal() -> None:
    store = MessageStore()
    store.insert(10, "sent", "A", "x")
    assert store.wal
    store.checkpoint()
    assert store.wal == []
    assert len(store.ordered_rows()) == 1  # checkpoint keeps the store itself


# -- app behaviour -----------------------------------------------------------


def _app(process: SimProcess, model: str = "cloud_messenger", **kwargs) -> SimApp:
    return SimApp(
        process,
        MessageStore(),
        LogcatLog(),
        FilestatTracker(),
        GroundTruthLog(),
        random.Random(0),
        model,
        **kwargs,
    )


def test_send_fires_burst(process) -> None:
    """One send triggers the initial call plus every flush repeat."""
    app = _app(process)
    app.app_open()
    process.advance(10_000)
    app.send_message("Alice", "hi")
    process.drain(6000)
    assert process.invocations[("native", "send")] == 1 + len(FLUSH_OFFSETS_MS)


def test_receive_fires_nothing(process) -> None:
    app = _app(process)
    app.app_open()
    process.advance(10_000)
    app.receive_message("Bob", "yo")
    process.drain(6000)
    assert process.invocations[("native", "send")] == 0
    assert sum(process.invocations.values()) == 0
    assert [e["event_type"] for e in app.truth.events] == ["message_received"]


def test_send_object_freed_loaded_objects_live(process) -> None:
    app = _app(process)
    app.app_open()
    process.advance(5000)
    app.send_message("Alice", "one")
    assert process.live_objects("cloud_message") == []

    process.advance(process.clock_ms + 1000)
    app.receive_message("Alice", "two")
    app.load_chat("Alice")
    live = process.live_objects("cloud_message")
    assert len(live) == 2  # the whole thread materializes
    process.advance(process.clock_ms + 60_000)
    assert len(process.live_objects("cloud_message")) == 2  # alive until close

    app.app_close()
    assert process.live_objects("cloud_message") == []


def test_close_checkpoints_wal(process) -> None:
    app = _app(process)
    app.app_open()
    process.advance(1000)
    app.send_message("Alice", "x")
    assert app.store.wal
    app.app_close()
    assert app.store.wal == []


def test_delegated_load_is_uninstrumented(process) -> None:
    """With the knob at 1.0 every load call runs outside instrumentation."""
    app = _app(process, uninstrumented_fraction=1.0)
    app.app_open()
    process.advance(1000)
    app.receive_message("CEO", "secret")
    assert app.load_chat("CEO") is False
    process.drain(6000)
    assert process.invocations[("native", "recv")] == 1 + len(FLUSH_OFFSETS_MS)
    assert sum(process.hook_firings.values()) == 0

    always = _app(SimProcess("r2", process.storage_root / "r2"))
    always.app_open()
    always.process.advance(1000)
    always.receive_message("CEO", "secret")
    assert always.load_chat("CEO") is True


def test_sms_model_uses_rt_trigger(process) -> None:
    app = _app(process, model="sms_bridge")
    app.app_open()
    process.advance(1000)
    app.receive_message("CEO", "s")
    app.load_chat("CEO")
    process.drain(6000)
    burst = 1 + len(FLUSH_OFFSETS_MS)
    assert process.invocations[("rt", "android.content.Intent.createFromParcel")] == burst


# -- scenarios ---------------------------------------------------------------


def test_scenario_a_ground_truth_counts(a_run) -> None:
    lines = (a_run / "ground_truth.jsonl").read_text().splitlines()
    events = [json.loads(l) for l in lines]
    sent = [e for e in events if e["event_type"] == "message_sent"]
    attacks = [e for e in sent if e["attack"]]
    assert len(attacks) == 3
    assert len(sent) == 3 + 12
    assert all(e["subject"] == "Alice" for e in attacks)
    times = [e["ts_ms"] for e in events]
    assert times == sorted(times)


def test_scenario_a_db_lacks_attack_rows(a_run) -> None:
    """Instant deletion scrubs every attack row from the store."""
    rows = (a_run / "messages.db").read_text().splitlines()[1:]
    assert len(rows) == 12
    assert not any("Sending_Attack" in r for r in rows)
    # the closing checkpoint flushed the journal: deletion before-images
    # survive in no baseline artifact
    wal = (a_run / "messages.db-wal").read_text().splitlines()[1:]
    assert wal == []
    for name in ("messages.db-wal", "logcat.txt", "filestat.csv"):
        assert "Sending_Attack" not in (a_run / name).read_text()


def test_scenario_artifacts_deterministic(tmp_path) -> None:
    spec = SCENARIO_PRESETS["A"]
    first = run_scenario(spec, seed=3, out_dir=tmp_path / "one")
    second = run_scenario(spec, seed=3, out_dir=tmp_path / "two")
    for name in (
        "ground_truth.jsonl",
        "messages.db",
        "messages.db-wal",
        "logcat.txt",
        "filestat.csv",
        "run.json",
    ):
        assert (first.run_dir / name).read_bytes() == (second.run_dir / name).read_bytes()
    logs_a = sorted((first.run_dir / "jitmflogs").iterdir())
    logs_b = sorted((second.run_dir / "jitmflogs").iterdir())
    assert [p.name for p in logs_a] == [p.name for p in logs_b]
    for pa, pb in zip(logs_a, logs_b):
        assert pa.read_bytes() == pb.read_bytes()


def test_scenario_seed_changes_content(tmp_path) -> None:
    spec = SCENARIO_PRESETS["A"]
    one = run_scenario(spec, seed=1, out_dir=tmp_path / "one")
    two = run_scenario(spec, seed=2, out_dir=tmp_path / "two")
    assert (one.run_dir / "ground_truth.jsonl").read_bytes() != (
        two.run_dir / "ground_truth.jsonl"
    ).read_bytes()


def test_manifest_shape(a_run) -> None:
    doc = json.loads((a_run / "run.json").read_text())
    assert doc["seed"] == 0
    assert doc["scenario"]["scenario_id"] == "A"
    assert doc["drivers"], "manifest must embed the driver configs"
    driver_doc = doc["drivers"][0]
    assert driver_doc["Acquisition"] == "online"
    stats = doc["driver_stats"][driver_doc["Driver_ID"]]
    assert stats["dumped"] > 0
    assert doc["clock_end_ms"] > 0


def test_cleanup_wipe_floods_wal(tmp_path) -> None:
    import dataclasses

    spec = dataclasses.replace(SCENARIO_PRESETS["A"], scenario_id="A-wipe", cleanup_delete=40)
    artifacts = run_scenario(spec, seed=0, out_dir=tmp_path)
    wal_rows = (artifacts.run_dir / "messages.db-wal").read_text().splitlines()[1:]
    assert len(wal_rows) == spec.wal_cap
    assert all(r.endswith(",1") for r in wal_rows)
    db_rows = (artifacts.run_dir / "messages.db").read_text().splitlines()[1:]
    assert db_rows == []  # everything was wiped
