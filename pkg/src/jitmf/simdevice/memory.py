"""Memory model of the simulated process: segments, allocation, object table."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..runtime import SegmentInfo

VALID_PERMS = {"".join(p) for p in (
    ("r", "w", "x"), ("r", "w", "-"), ("r", "-", "x"), ("r", "-", "-"),
    ("-", "w", "x"), ("-", "w", "-"), ("-", "-", "x"), ("-", "-", "-"),
)}


class MemorySegment:
    """A contiguous mapped range backed by a byte buffer."""

    def __init__(self, start: int, size: int, permissions: str, mapped_file: str | None = None):
        if permissions not in VALID_PERMS:
            raise ValueError(f"bad permission string {permissions!r}")
        if size <= 0:
            raise ValueError("segment size must be positive")
        self.start = start
        self.end = start + size
        self.permissions = permissions
        self.mapped_file = mapped_file
        self.buf = bytearray(size)

    @property
    def size(self) -> int:
        return self.end - self.start

    def contains(self, at: int, length: int = 0) -> bool:
        return self.start <= at and at + length <= self.end

    def info(self) -> SegmentInfo:
        return SegmentInfo(self.start, self.end, self.permissions, self.mapped_file)

    def write(self, at: int, data: bytes) -> None:
        off = at - self.start
        self.buf[off : off + len(data)] = data

    def read(self, at: int, length: int) -> bytes:
        off = at - self.start
        return bytes(self.buf[off : off + length])

    def zero(self, at: int, length: int) -> None:
        off = at - self.start
        self.buf[off : off + length] = bytes(length)


@dataclass
class SimObject:
    """One allocated evidence object; bytes live in the owning segment."""

    layout_id: str
    address: int
    fields: dict
    length: int
    allocated_at: int
    alive: bool = True
    freed_at: int | None = None
    zeroed: bool = False
    tag: str = ""  # scenario bookkeeping, e.g. the message id


class BumpAllocator:
    """Allocates forward through one segment; freed space is never reused.

    Freeing only marks the object; the owner decides when the bytes get
    zeroed (after the configured linger interval).
    """

    def __init__(self, segment: MemorySegment, *, align: int = 8):
        self.segment = segment
        self.align = align
        self._next = segment.start

    def allocate(self, length: int) -> int:
        addr = self._next
        if addr + length > self.segment.end:
            raise MemoryError("simulated heap exhausted")
        self._next = addr + length
        if self._next % self.align:
            self._next += self.align - (self._next % self.align)
        return addr

    @property
    def high_water(self) -> int:
        return self._next
