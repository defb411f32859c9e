"""The simulated instrumented process.

Implements the full runtime surface drivers rely on (globals, hooks, memory
enumeration/reads/permissions, raw segment dumps, object-dump helpers, calls,
append-only logs) on top of a virtual millisecond clock. Work can be
scheduled into the future (network flush retries, byte zeroing after free);
``advance`` executes due work in time order, so whole runs are deterministic.
"""

from __future__ import annotations

import heapq
import json
from collections import Counter
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .. import carver
from ..runtime import (
    HookCallback,
    HookEvent,
    PermissionDenied,
    SegmentInfo,
    UnknownHookTarget,
    UnmappedAddress,
)
from .memory import VALID_PERMS, BumpAllocator, MemorySegment, SimObject

HEAP_BASE = 0x7000_0000
HEAP_SIZE = 1 << 20  # 1 MiB rw- heap
DB_IMAGE_BASE = 0x5000_0000
DB_IMAGE_SIZE = 128 << 10  # r-- file-backed image of the message store

DEFAULT_NATIVE_EXPORTS = frozenset({"send", "recv", "write", "open", "read", "close", "connect"})
DEFAULT_RT_EXPORTS = frozenset(
    {
        "android.content.Intent.createFromParcel",
        "android.app.Activity.onResume",
        "android.database.Cursor.moveToNext",
    }
)


class SimProcess:
    def __init__(
        self,
        run_id: str,
        storage_root: Path,
        *,
        process_id: str = "pid-1000",
        linger_ms: int = 2000,
        heap_size: int = HEAP_SIZE,
        native_exports: frozenset[str] = DEFAULT_NATIVE_EXPORTS,
        rt_exports: frozenset[str] = DEFAULT_RT_EXPORTS,
        registry: carver.LayoutRegistry | None = None,
        db_file_name: str = "messages.db",
    ) -> None:
        self.run_id = run_id
        self.process_id = process_id
        self.storage_root = Path(storage_root)
        self.linger_ms = linger_ms
        self.registry = registry or carver.DEFAULT_REGISTRY
        self.clock_ms = 0

        self.heap = MemorySegment(HEAP_BASE, heap_size, "rw-")
        self.db_image = MemorySegment(DB_IMAGE_BASE, DB_IMAGE_SIZE, "r--", mapped_file=db_file_name)
        self.segments: list[MemorySegment] = [self.db_image, self.heap]
        self._alloc = BumpAllocator(self.heap)
        self.objects: list[SimObject] = []

        self.native_exports = set(native_exports)
        self.rt_exports = set(rt_exports)
        self._hooks: dict[tuple[str, str], list[HookCallback]] = {}
        self.invocations: Counter[tuple[str, str]] = Counter()
        self.hook_firings: Counter[tuple[str, str]] = Counter()

        self._globals: dict[str, str] = {}
        self._pending: list[tuple[int, int, Callable[[], None]]] = []
        self._seq = 0
        self._log_handles: dict[Path, object] = {}

    # -- clock and scheduling ------------------------------------------------

    def schedule(self, at_ms: int, fn: Callable[[], None]) -> None:
        if at_ms < self.clock_ms:
            raise ValueError("cannot schedule into the past")
        self._seq += 1
        heapq.heappush(self._pending, (at_ms, self._seq, fn))

    def advance(self, to_ms: int) -> None:
        """Run all scheduled work due up to ``to_ms``, then land the clock there."""
        if to_ms < self.clock_ms:
            raise ValueError("clock cannot move backwards")
        while self._pending and self._pending[0][0] <= to_ms:
            at, _, fn = heapq.heappop(self._pending)
            self.clock_ms = at
            fn()
        self.clock_ms = to_ms

    def advance_by(self, delta_ms: int) -> None:
        self.advance(self.clock_ms + delta_ms)

    def drain(self, slack_ms: int = 0) -> None:
        """Execute everything still pending, plus optional slack."""
        horizon = self.clock_ms
        while self._pending:
            horizon = max(horizon, self._pending[0][0])
            self.advance(horizon)
        if slack_ms:
            self.advance_by(slack_ms)

    # -- object lifecycle ------------------------------------------------------

    def allocate_object(self, layout_id: str, fields: Mapping, *, tag: str = "") -> SimObject:
        layout = self.registry.get(layout_id)
        blob = carver.encode_object(layout, fields)
        addr = self._alloc.allocate(len(blob))
        self.heap.write(addr, blob)
        obj = SimObject(
            layout_id=layout_id,
            address=addr,
            fields=dict(fields),
            length=len(blob),
            allocated_at=self.clock_ms,
            tag=tag,
        )
        self.objects.append(obj)
        return obj

    def free_object(self, obj: SimObject, *, linger_ms: int | None = None) -> None:
        """Mark dead now; bytes stay carvable until linger expires, then zero."""
        if not obj.alive:
            return
        obj.alive = False
        obj.freed_at = self.clock_ms
        linger = self.linger_ms if linger_ms is None else linger_ms
        self.schedule(self.clock_ms + linger, lambda: self._zero_object(obj))

    def _zero_object(self, obj: SimObject) -> None:
        if not obj.zeroed:
            self.heap.zero(obj.address, obj.length)
            obj.zeroed = True

    def live_objects(self, layout_id: str | None = None) -> list[SimObject]:
        return [
            o for o in self.objects if o.alive and (layout_id is None or o.layout_id == layout_id)
        ]

    def refresh_db_image(self, content: bytes) -> None:
        """Mirror the on-disk message store into the read-only mapped segment."""
        clipped = content[: self.db_image.size]
        self.db_image.zero(self.db_image.start, self.db_image.size)
        self.db_image.write(self.db_image.start, clipped)

    # -- runtime surface: globals ---------------------------------------------

    def set_global(self, key: str, value: str) -> bool:
        self._globals[key] = value
        return True

    def get_global(self, key: str) -> str | None:
        return self._globals.get(key)

    # -- runtime surface: hooks -------------------------------------------------

    def _place_hook(self, level: str, name: str, callback: HookCallback, exports: set[str]) -> bool:
        if name not in exports:
            return False
        self._hooks.setdefault((level, name), []).append(callback)
        return True

    def _remove_hook(self, level: str, name: str, callback: HookCallback) -> bool:
        entries = self._hooks.get((level, name), [])
        if callback in entries:
            entries.remove(callback)
            if not entries:
                self._hooks.pop((level, name), None)
            return True
        return False

    def place_native_hook(self, name: str, callback: HookCallback) -> bool:
        return self._place_hook("native", name, callback, self.native_exports)

    def remove_native_hook(self, name: str, callback: HookCallback) -> bool:
        return self._remove_hook("native", name, callback)

    def place_rt_hook(self, path: str, callback: HookCallback) -> bool:
        return self._place_hook("rt", path, callback, self.rt_exports)

    def remove_rt_hook(self, path: str, callback: HookCallback) -> bool:
        return self._remove_hook("rt", path, callback)

    def hook_table(self) -> Sequence[tuple[str, str, HookCallback]]:
        return [
            (level, name, cb)
            for (level, name), cbs in sorted(self._hooks.items())
            for cb in cbs
        ]

    # -- runtime surface: memory ------------------------------------------------

    def list_memory_segments(self) -> Sequence[SegmentInfo]:
        return [seg.info() for seg in self.segments]

    def add_segment(self, segment: MemorySegment) -> MemorySegment:
        self.segments.append(segment)
        return segment

    def _segment_at(self, at: int, length: int) -> MemorySegment:
        for seg in self.segments:
            if seg.contains(at, length):
                return seg
        raise UnmappedAddress(f"{at:#x}+{length}")

    def set_memory_permissions(self, segment_base: int, permissions: str) -> bool:
        if permissions not in VALID_PERMS:
            return False
        for seg in self.segments:
            if seg.start == segment_base:
                seg.permissions = permissions
                return True
        return False

    def read_memory(self, at: int, length: int) -> bytes:
        if length < 0:
            raise ValueError("negative read")
        seg = self._segment_at(at, length)
        if "r" not in seg.permissions:
            raise PermissionDenied(f"segment {seg.start:#x} is {seg.permissions}")
        return seg.read(at, length)

    def dump_memory_segment(self, start: int, end: int, location: str) -> bool:
        """Raw image + sidecar line (range, time, digest) for one mapped range."""
        seg = self._segment_at(start, end - start)
        if "r" not in seg.permissions:
            raise PermissionDenied(f"segment {seg.start:#x} is {seg.permissions}")
        data = seg.read(start, end - start)
        out_dir = self.resolve_path(location)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{start:08x}.bin").write_bytes(data)
        sidecar = {
            "hash_algorithm": carver.HASH_ALGORITHM,
            "start": start,
            "end": end,
            "time": self.clock_ms,
            "permissions": seg.permissions,
            "mapped_file": seg.mapped_file,
            "hash": __import__("hashlib").sha256(data).hexdigest(),
        }
        (out_dir / f"{start:08x}.meta").write_text(
            json.dumps(sidecar, separators=(",", ":")) + "\n", encoding="utf-8"
        )
        return True

    # -- runtime surface: object-dump helpers ------------------------------------

    def dump_native_object(
        self,
        start: int,
        end: int,
        location: str,
        carve: Callable[[bytes], list[int]],
        parse: Callable[[bytes, int], Mapping],
    ) -> bool:
        """Carve one address range with caller-supplied callbacks, log field maps."""
        data = self.read_memory(start, end - start)
        for off in carve(data):
            line = json.dumps(
                {"time": self.clock_ms, "address": start + off, "fields": dict(parse(data, off))},
                separators=(",", ":"),
            )
            if not self.append_log(location, line):
                return False
        return True

    def dump_rt_object(
        self,
        object_path: str,
        location: str,
        carve: Callable[[bytes], list[int]],
        parse: Callable[[bytes, int], Mapping],
    ) -> bool:
        """Like dump_native_object but scans every readable segment."""
        for seg in self.list_memory_segments():
            if not seg.readable:
                continue
            if not self.dump_native_object(seg.start, seg.end, location, carve, parse):
                return False
        return True

    # -- runtime surface: calls ----------------------------------------------------

    def _dispatch(self, level: str, name: str, exports: set[str],
                  call_args: Mapping[str, str] | None, instrumented: bool) -> None:
        if name not in exports:
            raise UnknownHookTarget(f"{level} function {name!r}")
        self.invocations[(level, name)] += 1
        if not instrumented:
            return
        event = HookEvent(
            fired_at=self.clock_ms,
            level=level,
            name=name,
            call_args=dict(call_args or {}),
            process_id=self.process_id,
        )
        for cb in list(self._hooks.get((level, name), [])):
            self.hook_firings[(level, name)] += 1
            cb(event)

    def call_native_function(
        self, name: str, call_args: Mapping[str, str] | None = None, *, instrumented: bool = True
    ) -> None:
        self._dispatch("native", name, self.native_exports, call_args, instrumented)

    def call_rt_function(
        self, path: str, call_args: Mapping[str, str] | None = None, *, instrumented: bool = True
    ) -> None:
        self._dispatch("rt", path, self.rt_exports, call_args, instrumented)

    # -- runtime surface: persistence -------------------------------------------------

    def resolve_path(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.storage_root / p

    def append_log(self, path: str, value: str) -> bool:
        """Append exactly one line; truthy only if the line was persisted."""
        target = self.resolve_path(path)
        handle = self._log_handles.get(target)
        try:
            if handle is None:
                target.parent.mkdir(parents=True, exist_ok=True)
                handle = open(target, "a", encoding="utf-8")
                self._log_handles[target] = handle
            handle.write(value.rstrip("\n") + "\n")
            handle.flush()
            return True
        except OSError:
            return False

    def close(self) -> None:
        for handle in self._log_handles.values():
            try:
                handle.close()
            except OSError:
                pass
        self._log_handles.clear()
