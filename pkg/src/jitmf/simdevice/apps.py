"""Simulated messaging apps layered over a process.

An app action does three things at once: mutate the persistent artifacts
(store, logs, file stats, ground truth), materialize the in-memory objects a
carver could find, and invoke the native/rt functions drivers hook. Outgoing
and chat-load actions re-invoke their function a few more times over the
following seconds (flush retries); those repeats are what give a windowed
sampler a deterministic shot at every action.
"""

from __future__ import annotations

import io
import csv
import random
from dataclasses import dataclass

from .artifacts import FilestatTracker, GroundTruthLog, LogcatLog, MessageStore
from .memory import SimObject
from .process import SimProcess

# Repeat invocations after the initial call, in ms. Together with the call
# itself these cover five distinct 1s residues mod 5s, so a windowed{1s,5s}
# gate passes exactly one of them no matter where the action lands.
FLUSH_OFFSETS_MS = (1000, 2000, 3000, 4000)


@dataclass(frozen=True)
class AppProfile:
    model: str
    layout_id: str
    send_call: tuple[str, str]
    load_call: tuple[str, str]
    has_direction_flag: bool


PROFILES: dict[str, AppProfile] = {
    "cloud_messenger": AppProfile(
        "cloud_messenger", "cloud_message", ("native", "send"), ("native", "recv"), True
    ),
    "local_messenger": AppProfile(
        "local_messenger", "local_message", ("native", "write"), ("native", "open"), True
    ),
    "sms_bridge": AppProfile(
        "sms_bridge",
        "push_payload",
        ("native", "write"),
        ("rt", "android.content.Intent.createFromParcel"),
        False,
    ),
}


def message_db_bytes(store: MessageStore) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("id", "ts_ms", "direction", "peer", "content"))
    for r in store.ordered_rows():
        writer.writerow((r.id, r.ts_ms, r.direction, r.peer, r.content))
    return buf.getvalue().encode("utf-8")


class SimApp:
    """One messaging app instance bound to a process and its artifacts."""

    def __init__(
        self,
        process: SimProcess,
        store: MessageStore,
        logcat: LogcatLog,
        filestat: FilestatTracker,
        truth: GroundTruthLog,
        rng: random.Random,
        model: str,
        *,
        uninstrumented_fraction: float = 0.0,
    ) -> None:
        if model not in PROFILES:
            raise ValueError(f"unknown app model {model!r}")
        if not 0.0 <= uninstrumented_fraction <= 1.0:
            raise ValueError("uninstrumented_fraction must be in [0, 1]")
        self.profile = PROFILES[model]
        self.process = process
        self.store = store
        self.logcat = logcat
        self.filestat = filestat
        self.truth = truth
        self.rng = rng
        self.uninstrumented_fraction = uninstrumented_fraction
        self._loaded: list[SimObject] = []

    # -- internals ---------------------------------------------------------

    def _fields(self, direction: str, peer: str, content: str, ts_ms: int) -> dict:
        if self.profile.has_direction_flag:
            return {"peer": peer, "content": content, "sent": direction == "sent", "ts": ts_ms}
        return {"peer": peer, "content": content, "kind": "sms", "ts": ts_ms}

    def _touch_files(self) -> None:
        now = self.process.clock_ms
        self.filestat.touch("messages.db", now, self.store.encoded_size())
        self.filestat.touch(
            "messages.db-wal", now, sum(len(d.content) + 32 for d in self.store.wal)
        )

    def _call_burst(self, call: tuple[str, str], args: dict, *, instrumented: bool = True) -> None:
        level, name = call
        caller = (
            self.process.call_native_function
            if level == "native"
            else self.process.call_rt_function
        )
        caller(name, args, instrumented=instrumented)
        for off in FLUSH_OFFSETS_MS:
            self.process.schedule(
                self.process.clock_ms + off,
                lambda: caller(name, args, instrumented=instrumented),
            )

    # -- lifecycle -----------------------------------------------------------

    def app_open(self) -> None:
        self.logcat.log(self.process.clock_ms, "I", "ActivityManager", f"app_open {self.profile.model}")

    def app_close(self) -> None:
        """Clean shutdown: releases loaded chat objects and checkpoints the WAL."""
        self.logcat.log(self.process.clock_ms, "I", "ActivityManager", f"app_close {self.profile.model}")
        for obj in self._loaded:
            self.process.free_object(obj)
        self._loaded.clear()
        self.store.checkpoint()
        self._touch_files()
        self.process.refresh_db_image(message_db_bytes(self.store))

    # -- user-visible actions ---------------------------------------------------

    def send_message(self, peer: str, content: str, *, attack: bool = False) -> int:
        now = self.process.clock_ms
        row_id = self.store.insert(now, "sent", peer, content)
        self.truth.append(now, "message_sent", peer, content, attack)
        obj = self.process.allocate_object(
            self.profile.layout_id, self._fields("sent", peer, content, now), tag="send"
        )
        self.process.free_object(obj)
        self._call_burst(self.profile.send_call, {"peer": peer, "bytes": str(obj.length)})
        self._touch_files()
        return row_id

    def receive_message(self, peer: str, content: str, *, attack: bool = False) -> int:
        """Incoming delivery lands out of process; nothing instrumentable fires."""
        now = self.process.clock_ms
        row_id = self.store.insert(now, "received", peer, content)
        self.truth.append(now, "message_received", peer, content, attack)
        self._touch_files()
        return row_id

    def delete_message(self, row_id: int) -> bool:
        ok = self.store.delete(row_id, self.process.clock_ms)
        if ok:
            self._touch_files()
        return ok

    def load_chat(self, peer: str, *, intercept: bool = False) -> bool:
        """Materialize one peer's chat in memory and fire the load-path call.

        Loads are delegable: with probability ``uninstrumented_fraction`` the
        work happens in an uninstrumented helper, so the calls run but no hook
        sees them. The coin is drawn either way to keep schedules comparable
        across fraction settings. Returns True when the load was instrumented.
        """
        now = self.process.clock_ms
        delegated = self.rng.random() < self.uninstrumented_fraction
        rows = [r for r in self.store.ordered_rows() if r.peer == peer]
        for r in rows:
            self._loaded.append(
                self.process.allocate_object(
                    self.profile.layout_id,
                    self._fields(r.direction, r.peer, r.content, r.ts_ms),
                    tag="load",
                )
            )
        self.logcat.log(now, "I", "ActivityTaskManager", "chat_open")
        if intercept:
            recent = " | ".join(r.content for r in rows[-2:])
            self.truth.append(now, "chat_intercepted", peer, recent, True)
        self._call_burst(
            self.profile.load_call,
            {"peer": peer, "rows": str(len(rows))},
            instrumented=not delegated,
        )
        return not delegated
