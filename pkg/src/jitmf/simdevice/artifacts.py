"""On-device artifacts a forensic pass would collect after an incident.

Everything here is deliberately lossy in the ways that matter: the message
store drops deleted rows, its write-ahead log keeps only the most recent
deltas since the last checkpoint, logcat never names peers, and file stats
carry one mtime per path. Ground truth is the omniscient counterpart used
only for scoring.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

VIRTUAL_EPOCH = datetime(2021, 1, 1, tzinfo=timezone.utc)

MESSAGE_DB_HEADER = ("id", "ts_ms", "direction", "peer", "content")
WAL_HEADER = ("id", "ts_ms", "direction", "peer", "content", "deleted_flag")
FILESTAT_HEADER = ("path", "mtime_ms", "size")

DIRECTIONS = ("sent", "received")


@dataclass
class MessageRow:
    id: int
    ts_ms: int
    direction: str
    peer: str
    content: str


@dataclass
class WalDelta:
    id: int
    ts_ms: int
    direction: str
    peer: str
    content: str
    deleted_flag: int


class MessageStore:
    """Message table plus a capped delta journal.

    The journal keeps at most ``wal_cap`` most-recent deltas and is cleared
    by ``checkpoint`` (the app does that when it shuts down cleanly). Delete
    deltas carry the row's before-image, which is exactly why the journal is
    forensically interesting.
    """

    def __init__(self, wal_cap: int = 20) -> None:
        if wal_cap < 1:
            raise ValueError("wal_cap must be positive")
        self.wal_cap = wal_cap
        self.rows: dict[int, MessageRow] = {}
        self.wal: list[WalDelta] = []
        self._next_id = 1

    def _append_delta(self, delta: WalDelta) -> None:
        self.wal.append(delta)
        if len(self.wal) > self.wal_cap:
            del self.wal[: len(self.wal) - self.wal_cap]

    def insert(self, ts_ms: int, direction: str, peer: str, content: str) -> int:
        if direction not in DIRECTIONS:
            raise ValueError(f"bad direction {direction!r}")
        row = MessageRow(self._next_id, ts_ms, direction, peer, content)
        self._next_id += 1
        self.rows[row.id] = row
        self._append_delta(WalDelta(row.id, ts_ms, direction, peer, content, 0))
        return row.id

    def delete(self, row_id: int, ts_ms: int) -> bool:
        row = self.rows.pop(row_id, None)
        if row is None:
            return False
        self._append_delta(WalDelta(row.id, ts_ms, row.direction, row.peer, row.content, 1))
        return True

    def checkpoint(self) -> None:
        self.wal.clear()

    def ordered_rows(self) -> list[MessageRow]:
        return sorted(self.rows.values(), key=lambda r: r.id)

    def encoded_size(self) -> int:
        return sum(len(r.peer) + len(r.content) + 24 for r in self.rows.values())


def logcat_timestamp(ts_ms: int) -> str:
    t = VIRTUAL_EPOCH + timedelta(milliseconds=ts_ms)
    return f"{t.month:02d}-{t.day:02d} {t.hour:02d}:{t.minute:02d}:{t.second:02d}.{ts_ms % 1000:03d}"


def parse_logcat_timestamp(stamp: str) -> int:
    """Inverse of logcat_timestamp under the fixed virtual epoch year."""
    t = datetime.strptime(stamp, "%m-%d %H:%M:%S.%f").replace(
        year=VIRTUAL_EPOCH.year, tzinfo=timezone.utc
    )
    return round((t - VIRTUAL_EPOCH).total_seconds() * 1000)


class LogcatLog:
    """Coarse system log: app lifecycle and UI events, never message peers."""

    def __init__(self) -> None:
        self.lines: list[str] = []

    def log(self, ts_ms: int, level: str, tag: str, message: str) -> None:
        self.lines.append(f"{logcat_timestamp(ts_ms)} {level} {tag}: {message}")


class FilestatTracker:
    def __init__(self) -> None:
        self._stats: dict[str, tuple[int, int]] = {}

    def touch(self, path: str, mtime_ms: int, size: int) -> None:
        self._stats[path] = (mtime_ms, size)

    def entries(self) -> list[tuple[str, int, int]]:
        return [(p, m, s) for p, (m, s) in sorted(self._stats.items())]


class GroundTruthLog:
    """Omniscient per-action record, for scoring only; never on-device."""

    def __init__(self) -> None:
        self.events: list[dict] = []
        self._last_ts = -1

    def append(self, ts_ms: int, event_type: str, subject: str, obj: str, attack: bool) -> None:
        if ts_ms <= self._last_ts:
            raise ValueError(f"ground truth times must strictly increase ({ts_ms} <= {self._last_ts})")
        self._last_ts = ts_ms
        self.events.append(
            {
                "ts_ms": ts_ms,
                "event_type": event_type,
                "subject": subject,
                "object": obj,
                "attack": attack,
            }
        )


@dataclass
class DeviceArtifacts:
    """Everything one simulated run leaves behind, rooted at ``run_dir``."""

    run_dir: Path
    manifest: dict = field(default_factory=dict)

    @property
    def message_db_path(self) -> Path:
        return self.run_dir / "messages.db"

    @property
    def wal_path(self) -> Path:
        return self.run_dir / "messages.db-wal"

    @property
    def logcat_path(self) -> Path:
        return self.run_dir / "logcat.txt"

    @property
    def filestat_path(self) -> Path:
        return self.run_dir / "filestat.csv"

    @property
    def ground_truth_path(self) -> Path:
        return self.run_dir / "ground_truth.jsonl"

    @property
    def jitmf_log_dir(self) -> Path:
        return self.run_dir / "jitmflogs"

    @property
    def manifest_path(self) -> Path:
        return self.run_dir / "run.json"


def _write_csv(path: Path, header: tuple[str, ...], rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_message_db(path: Path, store: MessageStore) -> None:
    _write_csv(
        path,
        MESSAGE_DB_HEADER,
        [(r.id, r.ts_ms, r.direction, r.peer, r.content) for r in store.ordered_rows()],
    )


def write_wal(path: Path, store: MessageStore) -> None:
    _write_csv(
        path,
        WAL_HEADER,
        [(d.id, d.ts_ms, d.direction, d.peer, d.content, d.deleted_flag) for d in store.wal],
    )


def write_logcat(path: Path, log: LogcatLog) -> None:
    path.write_text("".join(line + "\n" for line in log.lines), encoding="utf-8")


def write_filestat(path: Path, tracker: FilestatTracker) -> None:
    _write_csv(path, FILESTAT_HEADER, tracker.entries())


def write_ground_truth(path: Path, log: GroundTruthLog) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in log.events:
            fh.write(json.dumps(event, separators=(",", ":")) + "\n")


def write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
