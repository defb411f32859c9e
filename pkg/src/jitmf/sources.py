"""Forensic source parsers and the merged super timeline.

Every parser turns one artifact into timeline entries with a shared shape
and reports exactly what happened to every input line: parsed, malformed,
duplicate, or acquisition warning. The merge is a stable sort over
(time, source precedence), so equal-time entries keep a fixed order and the
output is byte-reproducible.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import carver
from .carver import DumpRecord
from .driverconfig import parse_driver_config
from .simdevice.artifacts import parse_logcat_timestamp

TIMELINE_HEADER = ("time", "source", "parser", "event_type", "subject", "object", "granularity", "raw_ref")

# Merge precedence for equal times: richest source first.
SOURCE_ORDER = {"jitmf": 0, "message_db": 1, "wal": 2, "logcat": 3, "filestat": 4}

GRANULARITIES = ("fine", "coarse")


@dataclass(frozen=True)
class TimelineEntry:
    time: float
    source: str
    parser: str
    event_type: str
    subject: str
    object: str
    granularity: str
    raw_ref: str


@dataclass
class ParseResult:
    entries: list[TimelineEntry] = field(default_factory=list)
    malformed: list[tuple[str, str]] = field(default_factory=list)
    duplicates: int = 0
    warnings: int = 0
    lines_total: int = 0

    def reconciles(self) -> bool:
        """Input lines are fully accounted for across the four buckets."""
        return self.lines_total == (
            len(self.entries) + len(self.malformed) + self.duplicates + self.warnings
        )


def classify_dump_event(event_label: str, fields: dict) -> str:
    """Map a dump's event label and fields to a timeline event type.

    Interception labels always stay opaque dumps; otherwise an explicit
    direction flag wins, then the label wording, then the opaque fallback.
    """
    label = event_label.lower()
    if "intercept" in label:
        return "object_dumped"
    sent = fields.get("sent")
    if isinstance(sent, bool):
        return "message_sent" if sent else "message_received"
    if "sent" in label:
        return "message_sent"
    if "received" in label:
        return "message_received"
    return "object_dumped"


def _record_entry(rec: DumpRecord, raw_ref: str, parser: str) -> TimelineEntry:
    return TimelineEntry(
        time=rec.time / 1000.0,
        source="jitmf",
        parser=parser,
        event_type=classify_dump_event(rec.event, rec.fields),
        subject=str(rec.fields.get("peer", "")),
        object=str(rec.fields.get("content", "")),
        granularity="fine",
        raw_ref=raw_ref,
    )


def _entries_from_records(
    records: list[tuple[DumpRecord, str]], parser: str
) -> tuple[list[TimelineEntry], int, int]:
    """Classify and dedup dump records; earliest occurrence of an object wins."""
    ordered = sorted(records, key=lambda pair: pair[0].time)
    seen: set[tuple] = set()
    entries: list[TimelineEntry] = []
    duplicates = 0
    warnings = 0
    for rec, ref in ordered:
        if rec.event == carver.WARNING_EVENT:
            warnings += 1
            continue
        key = (rec.object_name, tuple(sorted((k, str(v)) for k, v in rec.fields.items())))
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        entries.append(_record_entry(rec, ref, parser))
    return entries, duplicates, warnings


def parse_jitmf_log(path: Path, *, verify_hashes: bool = False) -> ParseResult:
    result = ParseResult()
    records: list[tuple[DumpRecord, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            result.lines_total += 1
            raw_ref = f"{path.name}:{lineno}"
            try:
                records.append((DumpRecord.from_json_line(line, verify=verify_hashes), raw_ref))
            except Exception as exc:
                result.malformed.append((raw_ref, str(exc)))
    result.entries, result.duplicates, result.warnings = _entries_from_records(records, "jitmf-log")
    return result


def replay_jitmf_dumps(dump_root: Path, driver_doc: dict) -> ParseResult:
    """Rebuild timeline entries from raw offline dumps instead of a live log."""
    spec = parse_driver_config(driver_doc)
    records = carver.replay_offline(dump_root, spec.evidence_objects, driver_id=spec.driver_id)
    result = ParseResult(lines_total=len(records))
    tagged = [(rec, f"{dump_root.name}:{i}") for i, rec in enumerate(records, start=1)]
    result.entries, result.duplicates, result.warnings = _entries_from_records(tagged, "jitmf-replay")
    return result


def _parse_csv_rows(path: Path):
    """Yield (lineno, row) for data rows; line 1 is the header."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1:
                continue
            yield lineno, row


def parse_message_db(path: Path) -> ParseResult:
    result = ParseResult()
    for lineno, row in _parse_csv_rows(path):
        result.lines_total += 1
        raw_ref = f"{path.name}:{lineno}"
        try:
            _, ts_ms, direction, peer, content = row
            if direction not in ("sent", "received"):
                raise ValueError(f"bad direction {direction!r}")
            event = "message_sent" if direction == "sent" else "message_received"
            result.entries.append(
                TimelineEntry(int(ts_ms) / 1000.0, "message_db", "message-db", event, peer, content, "fine", raw_ref)
            )
        except ValueError as exc:
            result.malformed.append((raw_ref, str(exc)))
    return result


def parse_wal(path: Path) -> ParseResult:
    result = ParseResult()
    for lineno, row in _parse_csv_rows(path):
        result.lines_total += 1
        raw_ref = f"{path.name}:{lineno}"
        try:
            _, ts_ms, direction, peer, content, deleted_flag = row
            if deleted_flag not in ("0", "1"):
                raise ValueError(f"bad deleted_flag {deleted_flag!r}")
            if direction not in ("sent", "received"):
                raise ValueError(f"bad direction {direction!r}")
            if deleted_flag == "1":
                event = "message_deleted"
            else:
                event = "message_sent" if direction == "sent" else "message_received"
            result.entries.append(
                TimelineEntry(int(ts_ms) / 1000.0, "wal", "wal-journal", event, peer, content, "fine", raw_ref)
            )
        except ValueError as exc:
            result.malformed.append((raw_ref, str(exc)))
    return result


def parse_logcat(path: Path) -> ParseResult:
    result = ParseResult()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            result.lines_total += 1
            raw_ref = f"{path.name}:{lineno}"
            try:
                stamp, rest = line[:18], line[19:]
                level, rest = rest.split(" ", 1)
                tag, message = rest.split(": ", 1)
                if len(level) != 1:
                    raise ValueError(f"bad level {level!r}")
                ts_ms = parse_logcat_timestamp(stamp)
                event = message.split(" ", 1)[0] if message else "log"
                result.entries.append(
                    TimelineEntry(ts_ms / 1000.0, "logcat", "logcat-text", event, "", message, "coarse", raw_ref)
                )
            except ValueError as exc:
                result.malformed.append((raw_ref, str(exc)))
    return result


def parse_filestat(path: Path) -> ParseResult:
    result = ParseResult()
    for lineno, row in _parse_csv_rows(path):
        result.lines_total += 1
        raw_ref = f"{path.name}:{lineno}"
        try:
            file_path, mtime_ms, size = row
            int(size)
            result.entries.append(
                TimelineEntry(int(mtime_ms) / 1000.0, "filestat", "filestat-csv", "file_modified", "", file_path, "coarse", raw_ref)
            )
        except ValueError as exc:
            result.malformed.append((raw_ref, str(exc)))
    return result


def merge_super_timeline(entry_groups: list[list[TimelineEntry]]) -> list[TimelineEntry]:
    """Stable merge: every input entry appears once, ordered by time then
    source precedence, with input order preserved inside ties."""
    merged = [e for group in entry_groups for e in group]
    merged.sort(key=lambda e: (e.time, SOURCE_ORDER.get(e.source, len(SOURCE_ORDER))))
    return merged


def write_super_timeline(path: Path, entries: list[TimelineEntry]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMELINE_HEADER)
        for e in entries:
            writer.writerow(
                ("%.6f" % e.time, e.source, e.parser, e.event_type, e.subject, e.object, e.granularity, e.raw_ref)
            )


def read_super_timeline(path: Path) -> list[TimelineEntry]:
    entries = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TIMELINE_HEADER:
            raise ValueError(f"unexpected timeline header {header!r}")
        for row in reader:
            time, source, parser, event_type, subject, obj, granularity, raw_ref = row
            entries.append(
                TimelineEntry(float(time), source, parser, event_type, subject, obj, granularity, raw_ref)
            )
    return entries


@dataclass
class SuperTimeline:
    run_id: str
    clock_end_ms: int
    entries: list[TimelineEntry]
    sources: dict[str, ParseResult]


def build_super_timeline(run_dir: Path | str, *, include_jitmf: bool = True) -> SuperTimeline:
    """Parse every artifact in a run directory and merge the results.

    With ``include_jitmf`` off this is the baseline an examiner gets from
    classical sources alone.
    """
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
    run_id = manifest["run_id"]

    results: dict[str, ParseResult] = {}
    if include_jitmf:
        jitmf = ParseResult()
        for doc in manifest.get("drivers", []):
            spec = parse_driver_config(doc)
            log_path = run_dir / spec.log_file(run_id)
            if spec.acquisition == "online":
                if log_path.exists():
                    part = parse_jitmf_log(log_path)
                else:
                    part = ParseResult()
            else:
                dump_root = run_dir / spec.log_file(run_id)[: -len(".jsonl")]
                dump_root = dump_root.with_name(dump_root.name + ".dumps")
                part = replay_jitmf_dumps(dump_root, doc) if dump_root.exists() else ParseResult()
            jitmf.entries.extend(part.entries)
            jitmf.malformed.extend(part.malformed)
            jitmf.duplicates += part.duplicates
            jitmf.warnings += part.warnings
            jitmf.lines_total += part.lines_total
        results["jitmf"] = jitmf

    results["message_db"] = parse_message_db(run_dir / "messages.db")
    results["wal"] = parse_wal(run_dir / "messages.db-wal")
    results["logcat"] = parse_logcat(run_dir / "logcat.txt")
    results["filestat"] = parse_filestat(run_dir / "filestat.csv")

    ordered_sources = sorted(results, key=lambda s: SOURCE_ORDER[s])
    merged = merge_super_timeline([results[s].entries for s in ordered_sources])
    return SuperTimeline(
        run_id=run_id,
        clock_end_ms=manifest.get("clock_end_ms", 0),
        entries=merged,
        sources=results,
    )
