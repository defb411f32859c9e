"""Binary object layouts, carving, and evidence acquisition.

Evidence objects live in process memory as a self-delimiting binary encoding:

    offset  size  meaning
    0       4     magic (layout specific)
    4       2     type_tag, big-endian u16
    6       1     field_count, u8
    7       ...   fields, each: name_len u8 | name | kind u8 | value_len u16 | value
    end     1     checksum, u8: XOR of every preceding byte

Field kinds are utf8 (1), u64 (2, 8-byte big-endian) and bool (3, one byte).
An offset is a carve hit only when the magic and type tag match, every length
field stays in bounds, names and kinds match the layout schema, values decode,
and the trailing checksum agrees. That rule gives completeness (every encoded
instance is found) and soundness (validated hits parse back to their fields).

Acquisition comes in two flavours. Online acquisition carves and parses at
dump time and appends one JSONL record per instance. Offline acquisition
writes raw segment images next to sidecar metadata, and ``replay_offline``
re-creates the same records later from those images.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

from .runtime import LogWriteFailure, PermissionDenied, Runtime, SegmentInfo


class EvidenceLike(Protocol):
    """The slice of an evidence-object spec acquisition needs."""

    @property
    def event_label(self) -> str: ...

    @property
    def object_name(self) -> str: ...

    @property
    def layout_id(self) -> str: ...

FIELD_KINDS = ("utf8", "u64", "bool")
_KIND_CODE = {"utf8": 1, "u64": 2, "bool": 3}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}

_HEADER = struct.Struct(">4sHB")
_U16 = struct.Struct(">H")
_U64 = struct.Struct(">Q")

HASH_ALGORITHM = "sha256"

#: JSONL schema of a dump record, in serialization order.
RECORD_FIELDS = ("time", "driver_id", "trigger_id", "event", "object", "address", "fields", "hash")

WARNING_EVENT = "acquisition-warning"

FieldValue = str | int | bool


class UnknownLayout(Exception):
    """A layout id was referenced that the registry does not hold."""


class MalformedObject(Exception):
    """Parsing was attempted at an offset that is not a valid carve point."""


class SidecarMissing(Exception):
    """A raw segment image has no sidecar metadata next to it."""


@dataclass(frozen=True)
class ObjectLayout:
    """Describes one carvable in-memory object type."""

    layout_id: str
    magic: bytes
    type_tag: int
    field_schema: tuple[tuple[str, str], ...]  # ordered (name, kind) pairs

    def __post_init__(self) -> None:
        if not self.layout_id:
            raise ValueError("layout_id must be non-empty")
        if len(self.magic) != 4:
            raise ValueError("magic must be exactly 4 bytes")
        if not 0 <= self.type_tag <= 0xFFFF:
            raise ValueError("type_tag must fit in u16")
        if not self.field_schema:
            raise ValueError("field_schema must be non-empty")
        seen = set()
        for name, kind in self.field_schema:
            if not name or len(name.encode("utf-8")) > 255:
                raise ValueError(f"bad field name {name!r}")
            if kind not in FIELD_KINDS:
                raise ValueError(f"unknown field kind {kind!r}")
            if name in seen:
                raise ValueError(f"duplicate field name {name!r}")
            seen.add(name)

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.field_schema)


class LayoutRegistry:
    """Layouts keyed by id; magics must be unique so carving is unambiguous."""

    def __init__(self) -> None:
        self._by_id: dict[str, ObjectLayout] = {}
        self._magics: dict[bytes, str] = {}

    def register(self, layout: ObjectLayout) -> ObjectLayout:
        existing = self._by_id.get(layout.layout_id)
        if existing is not None:
            if existing == layout:
                return layout
            raise ValueError(f"layout id {layout.layout_id!r} already registered differently")
        owner = self._magics.get(layout.magic)
        if owner is not None and owner != layout.layout_id:
            raise ValueError(f"magic {layout.magic!r} already used by layout {owner!r}")
        self._by_id[layout.layout_id] = layout
        self._magics[layout.magic] = layout.layout_id
        return layout

    def get(self, layout_id: str) -> ObjectLayout:
        try:
            return self._by_id[layout_id]
        except KeyError:
            raise UnknownLayout(layout_id) from None

    def __contains__(self, layout_id: str) -> bool:
        return layout_id in self._by_id

    def ids(self) -> tuple[str, ...]:
        return tuple(self._by_id)


#: Process-wide default registry; domain layouts register themselves here.
DEFAULT_REGISTRY = LayoutRegistry()


def _encode_value(kind: str, value: FieldValue) -> bytes:
    if kind == "utf8":
        raw = str(value).encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError("utf8 value longer than u16 length field allows")
        return raw
    if kind == "u64":
        if isinstance(value, str):
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < 2**64:
            raise ValueError(f"u64 field needs an unsigned 64-bit int, got {value!r}")
        return _U64.pack(value)
    if kind == "bool":
        if isinstance(value, str):
            lowered = value.strip().lower()
            if lowered not in ("true", "false", "0", "1"):
                raise ValueError(f"cannot read {value!r} as bool")
            value = lowered in ("true", "1")
        return b"\x01" if value else b"\x00"
    raise ValueError(f"unknown field kind {kind!r}")


def _decode_value(kind: str, raw: bytes) -> FieldValue:
    if kind == "utf8":
        return raw.decode("utf-8")
    if kind == "u64":
        if len(raw) != 8:
            raise ValueError("u64 value must be 8 bytes")
        return _U64.unpack(raw)[0]
    if kind == "bool":
        if len(raw) != 1 or raw[0] not in (0, 1):
            raise ValueError("bool value must be a single 0/1 byte")
        return raw[0] == 1
    raise ValueError(kind)


def _xor(data: Iterable[int]) -> int:
    acc = 0
    for b in data:
        acc ^= b
    return acc


def encode_object(layout: ObjectLayout, fields: Mapping[str, FieldValue]) -> bytes:
    """Serialize ``fields`` under ``layout``; schema order, trailing checksum."""
    if set(fields) != set(layout.field_names):
        raise ValueError(
            f"fields {sorted(fields)} do not match layout schema {sorted(layout.field_names)}"
        )
    out = bytearray(_HEADER.pack(layout.magic, layout.type_tag, len(layout.field_schema)))
    for name, kind in layout.field_schema:
        name_raw = name.encode("utf-8")
        value_raw = _encode_value(kind, fields[name])
        out.append(len(name_raw))
        out += name_raw
        out.append(_KIND_CODE[kind])
        out += _U16.pack(len(value_raw))
        out += value_raw
    out.append(_xor(out))
    return bytes(out)


def _validate_at(data: bytes, at: int, layout: ObjectLayout) -> tuple[dict[str, FieldValue], int] | None:
    """Full structural validation at ``at``; (fields, end) on success."""
    end_header = at + _HEADER.size
    if at < 0 or end_header > len(data):
        return None
    magic, type_tag, field_count = _HEADER.unpack_from(data, at)
    if magic != layout.magic or type_tag != layout.type_tag:
        return None
    if field_count != len(layout.field_schema):
        return None
    fields: dict[str, FieldValue] = {}
    pos = end_header
    for name, kind in layout.field_schema:
        if pos + 1 > len(data):
            return None
        name_len = data[pos]
        pos += 1
        if pos + name_len + 3 > len(data):
            return None
        if data[pos : pos + name_len] != name.encode("utf-8"):
            return None
        pos += name_len
        if data[pos] != _KIND_CODE[kind]:
            return None
        pos += 1
        (value_len,) = _U16.unpack_from(data, pos)
        pos += 2
        if pos + value_len > len(data):
            return None
        try:
            fields[name] = _decode_value(kind, data[pos : pos + value_len])
        except (ValueError, UnicodeDecodeError):
            return None
        pos += value_len
    if pos + 1 > len(data):
        return None
    if data[pos] != _xor(data[at:pos]):
        return None
    return fields, pos + 1


def carve_objects(data: bytes, layout: ObjectLayout) -> list[int]:
    """Every offset in ``data`` where a full ``layout`` encoding validates.

    Offsets come back ascending. The scan is anchored on the 4-byte magic, so
    sparse or zeroed buffers cost almost nothing.
    """
    hits: list[int] = []
    pos = data.find(layout.magic)
    while pos != -1:
        if _validate_at(data, pos, layout) is not None:
            hits.append(pos)
        pos = data.find(layout.magic, pos + 1)
    return hits


def parse_object(data: bytes, at: int, layout: ObjectLayout) -> dict[str, FieldValue]:
    """Decode the object at ``at``; raises MalformedObject off carve points."""
    result = _validate_at(data, at, layout)
    if result is None:
        raise MalformedObject(f"no valid {layout.layout_id} encoding at offset {at}")
    return result[0]


def encoded_length(layout: ObjectLayout, fields: Mapping[str, FieldValue]) -> int:
    return len(encode_object(layout, fields))


@dataclass(frozen=True)
class DumpRecord:
    """One acquired evidence object, as logged to a driver's JSONL file."""

    time: int  # dump time, process clock ms
    driver_id: str
    trigger_id: str
    event: str  # event label declared by the driver
    object_name: str
    address: int
    fields: Mapping[str, FieldValue] = field(default_factory=dict)

    def body(self) -> dict:
        return {
            "time": self.time,
            "driver_id": self.driver_id,
            "trigger_id": self.trigger_id,
            "event": self.event,
            "object": self.object_name,
            "address": self.address,
            "fields": dict(self.fields),
        }

    @property
    def content_hash(self) -> str:
        return record_hash(self.body())

    def to_json_line(self) -> str:
        doc = self.body()
        doc["hash"] = record_hash(doc)
        return json.dumps(doc, separators=(",", ":"), sort_keys=False)

    @classmethod
    def from_json_line(cls, line: str, *, verify: bool = False) -> "DumpRecord":
        doc = json.loads(line)
        missing = [k for k in RECORD_FIELDS if k not in doc]
        if missing:
            raise ValueError(f"record missing keys {missing}")
        rec = cls(
            time=int(doc["time"]),
            driver_id=doc["driver_id"],
            trigger_id=doc["trigger_id"],
            event=doc["event"],
            object_name=doc["object"],
            address=int(doc["address"]),
            fields=dict(doc["fields"]),
        )
        if verify and doc["hash"] != rec.content_hash:
            raise ValueError("record hash does not match canonical body")
        return rec


def record_hash(body: Mapping) -> str:
    """Digest of the canonical record body (schema key order, compact JSON)."""
    canonical = json.dumps(
        {k: body[k] for k in RECORD_FIELDS if k != "hash" and k in body},
        separators=(",", ":"),
        sort_keys=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _warning_record(time: int, driver_id: str, trigger_id: str, object_name: str,
                    seg: SegmentInfo, reason: str) -> DumpRecord:
    return DumpRecord(
        time=time,
        driver_id=driver_id,
        trigger_id=trigger_id,
        event=WARNING_EVENT,
        object_name=object_name,
        address=seg.start,
        fields={"error": reason, "segment": f"{seg.start:#010x}-{seg.end:#010x}"},
    )


def _readable_segments(runtime: Runtime) -> tuple[list[SegmentInfo], list[SegmentInfo]]:
    """Split segments into readable and stubbornly unreadable, adjusting where allowed."""
    readable: list[SegmentInfo] = []
    denied: list[SegmentInfo] = []
    for seg in runtime.list_memory_segments():
        if seg.readable:
            readable.append(seg)
        elif runtime.set_memory_permissions(seg.start, "r--"):
            readable.append(SegmentInfo(seg.start, seg.end, "r--", seg.mapped_file))
        else:
            denied.append(seg)
    return readable, denied


def acquire_online(
    runtime: Runtime,
    evidence: "EvidenceLike",
    *,
    time: int,
    driver_id: str,
    trigger_id: str,
    log_path: str,
    registry: LayoutRegistry | None = None,
) -> list[DumpRecord]:
    """Carve + parse ``evidence`` in every readable segment, one record per hit.

    Records are appended to ``log_path`` as they are produced. Segments that
    stay unreadable yield a warning record instead of data. The return value
    holds only the real evidence records.
    """
    registry = registry or DEFAULT_REGISTRY
    layout = registry.get(evidence.layout_id)
    records: list[DumpRecord] = []
    readable, denied = _readable_segments(runtime)
    for seg in denied:
        warn = _warning_record(time, driver_id, trigger_id, evidence.object_name, seg, "PermissionDenied")
        _append_record(runtime, log_path, warn)
    for seg in readable:
        try:
            data = runtime.read_memory(seg.start, seg.size)
        except PermissionDenied:
            warn = _warning_record(time, driver_id, trigger_id, evidence.object_name, seg, "PermissionDenied")
            _append_record(runtime, log_path, warn)
            continue
        for off in carve_objects(data, layout):
            rec = DumpRecord(
                time=time,
                driver_id=driver_id,
                trigger_id=trigger_id,
                event=evidence.event_label,
                object_name=evidence.object_name,
                address=seg.start + off,
                fields=parse_object(data, off, layout),
            )
            _append_record(runtime, log_path, rec)
            records.append(rec)
    return records


def _append_record(runtime: Runtime, log_path: str, rec: DumpRecord) -> None:
    if not runtime.append_log(log_path, rec.to_json_line()):
        raise LogWriteFailure(log_path)


def acquire_offline(
    runtime: Runtime,
    *,
    time: int,
    trigger_id: str,
    dump_root: Path,
) -> list[Path]:
    """Raw-dump every readable segment for later replay.

    One firing gets its own directory ``<time>-<trigger_id>`` holding a
    ``<start>.bin`` image plus ``<start>.meta`` sidecar per segment. Segments
    that stay unreadable get a sidecar only, marking them skipped.
    """
    firing_dir = Path(dump_root) / f"{time:012d}-{trigger_id}"
    firing_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    readable, denied = _readable_segments(runtime)
    for seg in readable:
        if runtime.dump_memory_segment(seg.start, seg.end, str(firing_dir)):
            written.append(firing_dir / f"{seg.start:08x}.bin")
    for seg in denied:
        sidecar = firing_dir / f"{seg.start:08x}.meta"
        sidecar.write_text(
            json.dumps(
                {
                    "hash_algorithm": HASH_ALGORITHM,
                    "start": seg.start,
                    "end": seg.end,
                    "time": time,
                    "permissions": seg.permissions,
                    "mapped_file": seg.mapped_file,
                    "skipped": "PermissionDenied",
                },
                separators=(",", ":"),
            )
            + "\n",
            encoding="utf-8",
        )
    return written


def read_sidecar(meta_path: Path) -> dict:
    return json.loads(Path(meta_path).read_text(encoding="utf-8"))


def replay_offline(
    dump_root: Path,
    evidence_objects: Sequence["EvidenceLike"],
    *,
    driver_id: str,
    registry: LayoutRegistry | None = None,
) -> list[DumpRecord]:
    """Re-create dump records from raw segment images.

    Capture time comes from each image's sidecar; the trigger id comes from
    the firing directory name. Images without a sidecar raise SidecarMissing.
    """
    registry = registry or DEFAULT_REGISTRY
    records: list[DumpRecord] = []
    root = Path(dump_root)
    for firing_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        try:
            _, trigger_id = firing_dir.name.split("-", 1)
        except ValueError:
            continue
        for image in sorted(firing_dir.glob("*.bin")):
            sidecar = image.with_suffix(".meta")
            if not sidecar.exists():
                raise SidecarMissing(str(image))
            meta = read_sidecar(sidecar)
            data = image.read_bytes()
            base = int(meta["start"])
            for evidence in evidence_objects:
                layout = registry.get(evidence.layout_id)
                for off in carve_objects(data, layout):
                    records.append(
                        DumpRecord(
                            time=int(meta["time"]),
                            driver_id=driver_id,
                            trigger_id=trigger_id,
                            event=evidence.event_label,
                            object_name=evidence.object_name,
                            address=base + off,
                            fields=parse_object(data, off, layout),
                        )
                    )
    records.sort(key=lambda r: (r.time, r.address, r.object_name))
    return records
