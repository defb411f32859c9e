"""Contract between forensic drivers and an instrumented process.

A driver never touches the process directly; it talks through this surface:
memory enumeration and reads, permission adjustment, raw segment dumps,
native/runtime function hooks, calls into the process, driver globals, and
append-only log writes. The simulated device in ``jitmf.simdevice``
implements the whole surface; tests may supply partial stand-ins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol, Sequence, runtime_checkable


class UnmappedAddress(Exception):
    """A read or dump touched an address outside every mapped segment."""


class PermissionDenied(Exception):
    """A read or dump touched a segment without read permission."""


class UnknownHookTarget(Exception):
    """A call named a function the process does not export."""


class LogWriteFailure(Exception):
    """An append-only log write could not be persisted."""


@dataclass(frozen=True)
class SegmentInfo:
    """Descriptor of one mapped memory segment, as enumerated by the process."""

    start: int
    end: int
    permissions: str  # three chars over "rwx", e.g. "rw-", "r--", "---"
    mapped_file: str | None = None

    @property
    def size(self) -> int:
        return self.end - self.start

    @property
    def readable(self) -> bool:
        return "r" in self.permissions


@dataclass(frozen=True)
class HookEvent:
    """Delivered to a hook callback each time the hooked function is called."""

    fired_at: int  # process clock, milliseconds
    level: str  # "native" or "rt"
    name: str  # hooked function name or dotted runtime path
    call_args: Mapping[str, str] = field(default_factory=dict)
    process_id: str = ""


HookCallback = Callable[[HookEvent], None]


@runtime_checkable
class Runtime(Protocol):
    """Everything a driver may ask of an instrumented process."""

    run_id: str
    process_id: str

    # globals shared between a driver's callbacks
    def set_global(self, key: str, value: str) -> bool: ...

    def get_global(self, key: str) -> str | None: ...

    # hook table
    def place_native_hook(self, name: str, callback: HookCallback) -> bool: ...

    def remove_native_hook(self, name: str, callback: HookCallback) -> bool: ...

    def place_rt_hook(self, path: str, callback: HookCallback) -> bool: ...

    def remove_rt_hook(self, path: str, callback: HookCallback) -> bool: ...

    def hook_table(self) -> Sequence[tuple[str, str, HookCallback]]: ...

    # memory
    def list_memory_segments(self) -> Sequence[SegmentInfo]: ...

    def set_memory_permissions(self, segment_base: int, permissions: str) -> bool: ...

    def read_memory(self, at: int, length: int) -> bytes: ...

    def dump_memory_segment(self, start: int, end: int, location: str) -> bool: ...

    # calls into the process
    def call_native_function(self, name: str, call_args: Mapping[str, str] | None = None) -> None: ...

    def call_rt_function(self, path: str, call_args: Mapping[str, str] | None = None) -> None: ...

    # persistence
    def append_log(self, path: str, value: str) -> bool: ...
