"""Queryable event model built from a merged timeline.

Events live in a small sqlite database so seeds, filters, and correlation
modes all reduce to SQL over one table. Synthetic events derived after the
fact (chat interceptions inferred from grouped memory dumps) are stored
alongside parsed ones, flagged, and never derived twice.
"""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .sources import TimelineEntry

DERIVED_RAW_REF = "derived:interception"


class EmptySeed(ValueError):
    """A seed with no subject, keywords, or event type can match anything."""


@dataclass(frozen=True)
class SeedEvent:
    subject: str = ""
    keywords: tuple[str, ...] = ()
    event_type: str = ""

    def __post_init__(self) -> None:
        if not (self.subject or self.keywords or self.event_type):
            raise EmptySeed("seed needs a subject, keywords, or an event type")


class CorrelationMode(str, Enum):
    SUBJECT = "subject"
    OBJECT = "object"
    EVENT_TYPE = "event_type"


@dataclass(frozen=True)
class KnowledgeEvent:
    id: int
    time: float
    event_type: str
    subject: str
    object: str
    source: str
    granularity: str
    raw_ref: str
    synthetic: bool = False


_SCHEMA = """
CREATE TABLE IF NOT EXISTS events (
    id INTEGER PRIMARY KEY,
    time REAL NOT NULL,
    event_type TEXT NOT NULL,
    subject TEXT NOT NULL,
    object TEXT NOT NULL,
    source TEXT NOT NULL,
    granularity TEXT NOT NULL,
    raw_ref TEXT NOT NULL,
    synthetic INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE INDEX IF NOT EXISTS idx_events_time ON events(time, id);
CREATE INDEX IF NOT EXISTS idx_events_subject ON events(subject);
CREATE INDEX IF NOT EXISTS idx_events_type ON events(event_type);
"""


def _row_event(row: sqlite3.Row) -> KnowledgeEvent:
    return KnowledgeEvent(
        id=row["id"],
        time=row["time"],
        event_type=row["event_type"],
        subject=row["subject"],
        object=row["object"],
        source=row["source"],
        granularity=row["granularity"],
        raw_ref=row["raw_ref"],
        synthetic=bool(row["synthetic"]),
    )


class KnowledgeModel:
    def __init__(self, conn: sqlite3.Connection, path: Path | None = None) -> None:
        self.conn = conn
        self.conn.row_factory = sqlite3.Row
        self.path = path

    # -- lifecycle -----------------------------------------------------------

    @classmethod
    def create(
        cls,
        path: Path | str,
        *,
        run_id: str,
        clock_end_ms: int,
        entries: Iterable[TimelineEntry] = (),
    ) -> "KnowledgeModel":
        db_path = Path(path)
        if db_path.exists():
            db_path.unlink()
        conn = sqlite3.connect(db_path)
        conn.executescript(_SCHEMA)
        conn.execute("INSERT INTO meta VALUES ('run_id', ?)", (run_id,))
        conn.execute("INSERT INTO meta VALUES ('clock_end_ms', ?)", (str(clock_end_ms),))
        model = cls(conn, db_path)
        model.add_entries(entries)
        return model

    @classmethod
    def open(cls, path: Path | str) -> "KnowledgeModel":
        db_path = Path(path)
        if not db_path.exists():
            raise FileNotFoundError(db_path)
        return cls(sqlite3.connect(db_path), db_path)

    def close(self) -> None:
        self.conn.close()

    def __enter__(self) -> "KnowledgeModel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- population -----------------------------------------------------------

    def add_entries(self, entries: Iterable[TimelineEntry]) -> int:
        rows = [
            (e.time, e.event_type, e.subject, e.object, e.source, e.granularity, e.raw_ref, 0)
            for e in entries
        ]
        self.conn.executemany(
            "INSERT INTO events (time, event_type, subject, object, source, granularity, raw_ref, synthetic)"
            " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
            rows,
        )
        self.conn.commit()
        return len(rows)

    # -- metadata ---------------------------------------------------------------

    def _meta(self, key: str) -> str:
        row = self.conn.execute("SELECT value FROM meta WHERE key = ?", (key,)).fetchone()
        return row["value"] if row else ""

    @property
    def run_id(self) -> str:
        return self._meta("run_id")

    @property
    def clock_end_ms(self) -> int:
        return int(self._meta("clock_end_ms") or 0)

    def event_count(self, *, synthetic: bool | None = None) -> int:
        if synthetic is None:
            row = self.conn.execute("SELECT COUNT(*) AS n FROM events").fetchone()
        else:
            row = self.conn.execute(
                "SELECT COUNT(*) AS n FROM events WHERE synthetic = ?", (int(synthetic),)
            ).fetchone()
        return row["n"]

    # -- queries -----------------------------------------------------------------

    def events(
        self,
        *,
        subject: str | None = None,
        keywords: Sequence[str] | None = None,
        event_type: str | None = None,
        source: str | None = None,
        granularity: str | None = None,
        since: float | None = None,
        until: float | None = None,
        limit: int | None = None,
    ) -> list[KnowledgeEvent]:
        """Filtered view, ordered by time (merge order inside ties)."""
        where, params = ["1=1"], []
        if subject is not None:
            where.append("subject = ?")
            params.append(subject)
        if keywords:
            ors = " OR ".join("instr(lower(object), ?) > 0" for _ in keywords)
            where.append(f"({ors})")
            params.extend(k.lower() for k in keywords)
        if event_type is not None:
            where.append("event_type = ?")
            params.append(event_type)
        if source is not None:
            where.append("source = ?")
            params.append(source)
        if granularity is not None:
            where.append("granularity = ?")
            params.append(granularity)
        if since is not None:
            where.append("time >= ?")
            params.append(since)
        if until is not None:
            where.append("time <= ?")
            params.append(until)
        sql = f"SELECT * FROM events WHERE {' AND '.join(where)} ORDER BY time, id"
        if limit is not None:
            sql += " LIMIT ?"
            params.append(limit)
        return [_row_event(r) for r in self.conn.execute(sql, params)]

    def correlate(self, seed: SeedEvent, mode: CorrelationMode | str) -> list[KnowledgeEvent]:
        """Events related to the seed under one correlation mode.

        subject: exact subject equality. object: case-insensitive keyword
        containment in the object. event_type: exact type equality. Coarse
        context events carry no subject and unrelated objects, so the first
        two modes exclude them without special casing.
        """
        mode = CorrelationMode(mode)
        if mode is CorrelationMode.SUBJECT:
            if not seed.subject:
                raise ValueError("subject mode needs a seed subject")
            return self.events(subject=seed.subject)
        if mode is CorrelationMode.OBJECT:
            if not seed.keywords:
                raise ValueError("object mode needs seed keywords")
            return self.events(keywords=seed.keywords)
        if not seed.event_type:
            raise ValueError("event_type mode needs a seed event type")
        return self.events(event_type=seed.event_type)

    # -- derived events --------------------------------------------------------------

    def derive_interception_events(self, window_ms: int = 0) -> list[KnowledgeEvent]:
        """Turn grouped memory dumps into chat-interception events.

        A group is >=2 dumped objects for one subject chained by inter-dump
        gaps of at most the window, each of whose contents already appears as
        a sent/received message strictly before the dump. Gap chaining means
        a wider window can only merge groups, never split them. One synthetic
        event per group; derivation is idempotent because existing synthetics
        suppress re-insertion.
        """
        window_s = window_ms / 1000.0
        dumps = self.conn.execute(
            "SELECT * FROM events WHERE event_type = 'object_dumped' AND synthetic = 0"
            " AND subject != '' ORDER BY subject, time, id"
        ).fetchall()

        groups: list[list[sqlite3.Row]] = []
        for row in dumps:
            current = groups[-1] if groups else None
            if (
                current
                and current[-1]["subject"] == row["subject"]
                and row["time"] - current[-1]["time"] <= window_s
            ):
                current.append(row)
            else:
                groups.append([row])

        created: list[KnowledgeEvent] = []
        for group in groups:
            if len(group) < 2:
                continue
            if not all(self._has_earlier_message(m["object"], m["time"]) for m in group):
                continue
            subject = group[0]["subject"]
            when = max(m["time"] for m in group)
            ordered = sorted(group, key=lambda m: (m["time"], m["id"]))
            joined = " | ".join(m["object"] for m in ordered)
            exists = self.conn.execute(
                "SELECT 1 FROM events WHERE synthetic = 1 AND event_type = 'chat_intercepted'"
                " AND subject = ? AND time = ?",
                (subject, when),
            ).fetchone()
            if exists:
                continue
            cur = self.conn.execute(
                "INSERT INTO events (time, event_type, subject, object, source, granularity, raw_ref, synthetic)"
                " VALUES (?, 'chat_intercepted', ?, ?, 'jitmf', 'fine', ?, 1)",
                (when, subject, joined, DERIVED_RAW_REF),
            )
            created.append(
                KnowledgeEvent(
                    id=cur.lastrowid,
                    time=when,
                    event_type="chat_intercepted",
                    subject=subject,
                    object=joined,
                    source="jitmf",
                    granularity="fine",
                    raw_ref=DERIVED_RAW_REF,
                    synthetic=True,
                )
            )
        self.conn.commit()
        return created

    def _has_earlier_message(self, content: str, before: float) -> bool:
        row = self.conn.execute(
            "SELECT MIN(time) AS t FROM events WHERE event_type IN ('message_sent', 'message_received')"
            " AND object = ? AND synthetic = 0",
            (content,),
        ).fetchone()
        return row["t"] is not None and row["t"] < before


def populate_model(db_path: Path | str, run_id: str, clock_end_ms: int, entries: Iterable[TimelineEntry]) -> KnowledgeModel:
    return KnowledgeModel.create(db_path, run_id=run_id, clock_end_ms=clock_end_ms, entries=entries)
