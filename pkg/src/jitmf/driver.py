"""Declarative forensic drivers and their evaluation engine.

A driver binds evidence objects to triggers: hookable functions in the target
process, each guarded by a named predicate and a process-wide sampling
strategy. When a hooked function fires, the predicate runs first, then the
sampling gate; only if both pass is evidence acquired (carved and parsed
online, or raw-dumped for offline replay) and appended to the driver's log.
"""

from __future__ import annotations

import posixpath
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from . import carver
from .runtime import HookCallback, HookEvent, LogWriteFailure, Runtime

NATIVE_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
RT_NAME = re.compile(r"^[A-Za-z_][\w$]*(\.[A-Za-z_][\w$]*){2,}$")

TRIGGER_LEVELS = ("native", "rt")
TRIGGER_CLASSES = ("network", "storage", "transform")
ACQUISITION_MODES = ("online", "offline")


class DriverInitFailure(Exception):
    """Driver initialization could not complete; no hooks were left behind."""


class HookPlacementFailure(DriverInitFailure):
    """A hook target could not be instrumented; placed hooks were rolled back."""


class DuplicateDriver(DriverInitFailure):
    """A driver with this id is already loaded."""


@dataclass(frozen=True)
class Scope:
    app_id: str
    incident_scenario: str


@dataclass(frozen=True)
class SamplingStrategy:
    """Gates dumps in time. Durations are in seconds."""

    kind: str  # "always" or "windowed"
    active_duration: float = 0.0
    period: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("always", "windowed"):
            raise ValueError(f"unknown sampling kind {self.kind!r}")
        if self.kind == "windowed" and not 0 < self.active_duration <= self.period:
            raise ValueError("windowed sampling needs 0 < active_duration <= period")

    @classmethod
    def always(cls) -> "SamplingStrategy":
        return cls(kind="always")

    @classmethod
    def windowed(cls, active_duration: float, period: float) -> "SamplingStrategy":
        return cls(kind="windowed", active_duration=active_duration, period=period)


def sampling_gate(strategy: SamplingStrategy, at_ms: int) -> bool:
    """Pure gate: under windowed sampling the window [0, active) repeats each period.

    The phase anchors at process start, so t=0 is always inside the window.
    """
    if strategy.kind == "always":
        return True
    period_ms = round(strategy.period * 1000)
    active_ms = round(strategy.active_duration * 1000)
    return (at_ms % period_ms) < active_ms


@dataclass(frozen=True)
class TriggerSpec:
    trigger_id: str
    hooked_function_name: str
    level: str  # "native" or "rt"
    trigger_class: str  # "network", "storage" or "transform"
    predicate_id: str = "const-true"

    def validate(self) -> None:
        if not self.trigger_id:
            raise ValueError("trigger_id must be non-empty")
        if self.level not in TRIGGER_LEVELS:
            raise ValueError(f"trigger {self.trigger_id}: unknown level {self.level!r}")
        if self.trigger_class not in TRIGGER_CLASSES:
            raise ValueError(f"trigger {self.trigger_id}: unknown class {self.trigger_class!r}")
        if self.level == "native" and not NATIVE_NAME.match(self.hooked_function_name):
            raise ValueError(
                f"trigger {self.trigger_id}: native target must be a plain identifier, "
                f"got {self.hooked_function_name!r}"
            )
        if self.level == "rt" and not RT_NAME.match(self.hooked_function_name):
            raise ValueError(
                f"trigger {self.trigger_id}: rt target must be a dotted namespace.object.method path, "
                f"got {self.hooked_function_name!r}"
            )


@dataclass(frozen=True)
class EvidenceObjectSpec:
    event_label: str
    object_name: str
    layout_id: str
    trigger_ids: tuple[str, ...]

    def validate(self) -> None:
        if not self.event_label or not self.object_name or not self.layout_id:
            raise ValueError("evidence objects need event_label, object_name and layout_id")
        if not self.trigger_ids:
            raise ValueError(f"evidence object {self.object_name!r} references no triggers")


@dataclass(frozen=True)
class TriggerContext:
    """State handed to trigger evaluation when a hooked function fires."""

    fired_at: int  # ms on the process clock
    trigger_id: str
    call_args: Mapping[str, str] = field(default_factory=dict)
    process_id: str = ""


@dataclass(frozen=True)
class DriverSpec:
    driver_id: str
    scope: Scope
    evidence_objects: tuple[EvidenceObjectSpec, ...]
    acquisition: str  # "online" or "offline"
    triggers: tuple[TriggerSpec, ...]
    sampling: SamplingStrategy
    log_location: str
    globals: Mapping[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if not self.driver_id:
            raise ValueError("driver_id must be non-empty")
        if self.acquisition not in ACQUISITION_MODES:
            raise ValueError(f"unknown acquisition mode {self.acquisition!r}")
        trigger_ids = [t.trigger_id for t in self.triggers]
        if len(set(trigger_ids)) != len(trigger_ids):
            raise ValueError("trigger ids must be unique within a driver")
        # the same function may not be hooked at both levels by one driver
        by_name: dict[str, set[str]] = {}
        for t in self.triggers:
            t.validate()
            by_name.setdefault(t.hooked_function_name, set()).add(t.level)
        for name, levels in by_name.items():
            if len(levels) > 1:
                raise ValueError(f"function {name!r} is hooked at both native and rt level")
        known = set(trigger_ids)
        referenced: set[str] = set()
        for ev in self.evidence_objects:
            ev.validate()
            for tid in ev.trigger_ids:
                if tid not in known:
                    raise ValueError(
                        f"evidence object {ev.object_name!r} references unknown trigger {tid!r}"
                    )
                referenced.add(tid)
        orphans = known - referenced
        if orphans:
            raise ValueError(f"triggers {sorted(orphans)} map to no evidence object")

    def trigger(self, trigger_id: str) -> TriggerSpec:
        for t in self.triggers:
            if t.trigger_id == trigger_id:
                return t
        raise KeyError(trigger_id)

    def evidence_for(self, trigger_id: str) -> tuple[EvidenceObjectSpec, ...]:
        return tuple(ev for ev in self.evidence_objects if trigger_id in ev.trigger_ids)

    def log_file(self, run_id: str) -> str:
        return posixpath.join(self.log_location, f"{self.driver_id}-{run_id}.jsonl")


# --------------------------------------------------------------------------
# predicates

PredicateFn = Callable[[Mapping[str, str], Mapping[str, str]], bool]

PREDICATES: dict[str, PredicateFn] = {}


def register_predicate(name: str) -> Callable[[PredicateFn], PredicateFn]:
    def deco(fn: PredicateFn) -> PredicateFn:
        PREDICATES[name] = fn
        return fn

    return deco


@register_predicate("const-true")
def _const_true(call_args: Mapping[str, str], globals_: Mapping[str, str]) -> bool:
    return True


@register_predicate("const-false")
def _const_false(call_args: Mapping[str, str], globals_: Mapping[str, str]) -> bool:
    return False


@register_predicate("arg-substring-match")
def _arg_substring_match(call_args: Mapping[str, str], globals_: Mapping[str, str]) -> bool:
    """True when the arg named by globals["match_arg"] contains globals["match_substring"]."""
    arg_name = globals_.get("match_arg", "")
    needle = globals_.get("match_substring", "")
    if not arg_name or not needle:
        return False
    return needle in str(call_args.get(arg_name, ""))


PREDICATES["always"] = PREDICATES["const-true"]
PREDICATES["never"] = PREDICATES["const-false"]


# --------------------------------------------------------------------------
# evaluation outcomes

class FireKind(str, Enum):
    DUMPED = "dumped"
    SUPPRESSED_BY_PREDICATE = "suppressed_by_predicate"
    SUPPRESSED_BY_SAMPLING = "suppressed_by_sampling"


@dataclass(frozen=True)
class FireOutcome:
    kind: FireKind
    record_count: int = 0

    @property
    def dumped(self) -> bool:
        return self.kind is FireKind.DUMPED


@dataclass(frozen=True)
class InitResult:
    success: bool
    hooks_placed: int


class _TriggerHook:
    """Callback installed in the process hook table; one per trigger."""

    __slots__ = ("engine", "driver_id", "trigger_id")

    def __init__(self, engine: "DriverEngine", driver_id: str, trigger_id: str) -> None:
        self.engine = engine
        self.driver_id = driver_id
        self.trigger_id = trigger_id

    def __call__(self, event: HookEvent) -> None:
        ctx = TriggerContext(
            fired_at=event.fired_at,
            trigger_id=self.trigger_id,
            call_args=event.call_args,
            process_id=event.process_id,
        )
        self.engine._on_fire(self.driver_id, ctx)


@dataclass
class _LoadedDriver:
    spec: DriverSpec
    log_path: str
    hooks: list[tuple[TriggerSpec, _TriggerHook]]


class DriverEngine:
    """Holds the loaded driver set for one process and evaluates firings."""

    def __init__(
        self,
        runtime: Runtime,
        *,
        registry: carver.LayoutRegistry | None = None,
        predicates: Mapping[str, PredicateFn] | None = None,
    ) -> None:
        self.runtime = runtime
        self.registry = registry or carver.DEFAULT_REGISTRY
        self.predicates = dict(predicates or PREDICATES)
        self.loaded: dict[str, _LoadedDriver] = {}
        # (driver_id, fired_at, outcome) per evaluated firing, for audit/tests
        self.outcomes: list[tuple[str, int, FireOutcome]] = []
        # log-write failures surface here; process execution is never affected
        self.errors: list[tuple[str, int, str]] = []

    # -- lifecycle ---------------------------------------------------------

    def init_driver(self, spec: DriverSpec) -> InitResult:
        """Validate and instrument. Either every trigger gets its hook or none do."""
        spec.validate()
        if spec.driver_id in self.loaded:
            raise DuplicateDriver(spec.driver_id)
        if spec.acquisition == "online":
            for ev in spec.evidence_objects:
                self.registry.get(ev.layout_id)  # raises UnknownLayout
        for trig in spec.triggers:
            if trig.predicate_id not in self.predicates:
                raise DriverInitFailure(
                    f"trigger {trig.trigger_id}: unknown predicate {trig.predicate_id!r}"
                )
        placed: list[tuple[TriggerSpec, _TriggerHook]] = []
        for trig in spec.triggers:
            hook = _TriggerHook(self, spec.driver_id, trig.trigger_id)
            if trig.level == "native":
                ok = self.runtime.place_native_hook(trig.hooked_function_name, hook)
            else:
                ok = self.runtime.place_rt_hook(trig.hooked_function_name, hook)
            if not ok:
                self._remove_hooks(placed)
                raise HookPlacementFailure(
                    f"driver {spec.driver_id}: cannot hook {trig.level} "
                    f"function {trig.hooked_function_name!r}"
                )
            placed.append((trig, hook))
        for key, value in spec.globals.items():
            self.runtime.set_global(f"{spec.driver_id}.{key}", value)
        self.loaded[spec.driver_id] = _LoadedDriver(
            spec=spec,
            log_path=spec.log_file(self.runtime.run_id),
            hooks=placed,
        )
        return InitResult(success=True, hooks_placed=len(placed))

    def teardown_driver(self, driver_id: str) -> None:
        loaded = self.loaded.pop(driver_id, None)
        if loaded is None:
            return
        self._remove_hooks(loaded.hooks)

    def teardown_all(self) -> None:
        for driver_id in list(self.loaded):
            self.teardown_driver(driver_id)

    def _remove_hooks(self, placed: Iterable[tuple[TriggerSpec, _TriggerHook]]) -> None:
        for trig, hook in placed:
            if trig.level == "native":
                self.runtime.remove_native_hook(trig.hooked_function_name, hook)
            else:
                self.runtime.remove_rt_hook(trig.hooked_function_name, hook)

    # -- evaluation --------------------------------------------------------

    def evaluate_trigger(self, spec: DriverSpec, ctx: TriggerContext) -> FireOutcome:
        """Predicate first, then the sampling gate, then acquisition.

        Suppressed firings leave the log untouched. A dump that cannot be
        persisted raises LogWriteFailure after any earlier lines in the same
        firing were already appended; callers decide how to surface that.
        """
        trig = spec.trigger(ctx.trigger_id)
        predicate = self.predicates[trig.predicate_id]
        if not predicate(ctx.call_args, spec.globals):
            return FireOutcome(FireKind.SUPPRESSED_BY_PREDICATE)
        if not sampling_gate(spec.sampling, ctx.fired_at):
            return FireOutcome(FireKind.SUPPRESSED_BY_SAMPLING)
        loaded = self.loaded.get(spec.driver_id)
        log_path = loaded.log_path if loaded else spec.log_file(self.runtime.run_id)
        if spec.acquisition == "online":
            count = 0
            for ev in spec.evidence_for(ctx.trigger_id):
                records = carver.acquire_online(
                    self.runtime,
                    ev,
                    time=ctx.fired_at,
                    driver_id=spec.driver_id,
                    trigger_id=ctx.trigger_id,
                    log_path=log_path,
                    registry=self.registry,
                )
                count += len(records)
            return FireOutcome(FireKind.DUMPED, record_count=count)
        dump_root = Path(self._offline_root(spec))
        written = carver.acquire_offline(
            self.runtime, time=ctx.fired_at, trigger_id=ctx.trigger_id, dump_root=dump_root
        )
        return FireOutcome(FireKind.DUMPED, record_count=len(written))

    def _offline_root(self, spec: DriverSpec) -> str:
        base = spec.log_file(self.runtime.run_id)
        root = base[: -len(".jsonl")] + ".dumps"
        resolve = getattr(self.runtime, "resolve_path", None)
        return str(resolve(root)) if resolve else root

    def _on_fire(self, driver_id: str, ctx: TriggerContext) -> None:
        loaded = self.loaded.get(driver_id)
        if loaded is None:
            return
        try:
            outcome = self.evaluate_trigger(loaded.spec, ctx)
        except LogWriteFailure as exc:
            self.errors.append((driver_id, ctx.fired_at, str(exc)))
            return
        self.outcomes.append((driver_id, ctx.fired_at, outcome))

    # -- audit helpers -----------------------------------------------------

    def hooks_for(self, driver_id: str) -> list[tuple[str, str]]:
        """(level, function) pairs this driver currently has instrumented."""
        table = []
        for level, name, callback in self.runtime.hook_table():
            if isinstance(callback, _TriggerHook) and callback.driver_id == driver_id:
                table.append((level, name))
        return table

    def dumped_count(self, driver_id: str | None = None) -> int:
        return sum(
            1
            for d, _, outcome in self.outcomes
            if outcome.dumped and (driver_id is None or d == driver_id)
        )


def replay_driver_log(path: Path, *, verify: bool = False) -> list[carver.DumpRecord]:
    """Read a driver's JSONL log back into records; malformed lines raise."""
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(carver.DumpRecord.from_json_line(line, verify=verify))
    return records
