"""Load and save driver specs as declarative YAML config files.

Top-level keys use the canonical driver template names:

    Driver_ID: cm-crime-proxy
    Scope: {app: cloudmsg, incident_scenario: crime_proxy}
    Evidence_objects:
      - event: Cloud Message Sent
        object_name: cloudmsg.MessageObject
        layout_id: cloud_message
        triggers: [cm-send]
    Acquisition: online
    Triggers:
      - trigger_id: cm-send
        hooked_function_name: send
        level: native
        trigger_class: network
        predicate: const-true
    Sampling_strategy: {kind: windowed, active_duration: 1.0, period: 5.0}
    Log_location: jitmflogs
    Globals: {}

``Sampling_strategy: always`` is accepted as shorthand for the always gate.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import yaml

from .driver import (
    DriverSpec,
    EvidenceObjectSpec,
    SamplingStrategy,
    Scope,
    TriggerSpec,
)

TOP_LEVEL_KEYS = (
    "Driver_ID",
    "Scope",
    "Evidence_objects",
    "Acquisition",
    "Triggers",
    "Sampling_strategy",
    "Log_location",
    "Globals",
)


class ConfigError(ValueError):
    """The config file does not describe a valid driver."""


def _require(doc: Mapping[str, Any], key: str) -> Any:
    if key not in doc:
        raise ConfigError(f"missing required key {key!r}")
    return doc[key]


def _parse_scope(raw: Any) -> Scope:
    if isinstance(raw, Mapping):
        return Scope(app_id=str(_require(raw, "app")), incident_scenario=str(_require(raw, "incident_scenario")))
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return Scope(app_id=str(raw[0]), incident_scenario=str(raw[1]))
    raise ConfigError(f"Scope must be a mapping or a two-item list, got {raw!r}")


def _parse_sampling(raw: Any) -> SamplingStrategy:
    if isinstance(raw, str):
        if raw == "always":
            return SamplingStrategy.always()
        raise ConfigError(f"unknown sampling shorthand {raw!r}")
    if isinstance(raw, Mapping):
        kind = str(_require(raw, "kind"))
        if kind == "always":
            return SamplingStrategy.always()
        try:
            return SamplingStrategy(
                kind=kind,
                active_duration=float(raw.get("active_duration", 0.0)),
                period=float(raw.get("period", 0.0)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"Sampling_strategy must be a mapping or 'always', got {raw!r}")


def parse_driver_config(doc: Mapping[str, Any]) -> DriverSpec:
    unknown = set(doc) - set(TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    triggers = []
    for raw in _require(doc, "Triggers") or []:
        triggers.append(
            TriggerSpec(
                trigger_id=str(_require(raw, "trigger_id")),
                hooked_function_name=str(_require(raw, "hooked_function_name")),
                level=str(_require(raw, "level")),
                trigger_class=str(_require(raw, "trigger_class")),
                predicate_id=str(raw.get("predicate", "const-true")),
            )
        )
    evidence = []
    for raw in _require(doc, "Evidence_objects") or []:
        trigger_ids = raw.get("triggers")
        if not isinstance(trigger_ids, (list, tuple)):
            raise ConfigError("each evidence object needs a 'triggers' list")
        evidence.append(
            EvidenceObjectSpec(
                event_label=str(_require(raw, "event")),
                object_name=str(_require(raw, "object_name")),
                layout_id=str(_require(raw, "layout_id")),
                trigger_ids=tuple(str(t) for t in trigger_ids),
            )
        )
    spec = DriverSpec(
        driver_id=str(_require(doc, "Driver_ID")),
        scope=_parse_scope(_require(doc, "Scope")),
        evidence_objects=tuple(evidence),
        acquisition=str(_require(doc, "Acquisition")),
        triggers=tuple(triggers),
        sampling=_parse_sampling(_require(doc, "Sampling_strategy")),
        log_location=str(_require(doc, "Log_location")),
        globals={str(k): str(v) for k, v in (doc.get("Globals") or {}).items()},
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return spec


def load_driver_config(path: Path | str) -> DriverSpec:
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, Mapping):
        raise ConfigError(f"{path}: driver config must be a mapping")
    try:
        return parse_driver_config(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def driver_config_doc(spec: DriverSpec) -> dict:
    """Inverse of parse_driver_config, for writing configs back out."""
    sampling: Any
    if spec.sampling.kind == "always":
        sampling = "always"
    else:
        sampling = {
            "kind": spec.sampling.kind,
            "active_duration": spec.sampling.active_duration,
            "period": spec.sampling.period,
        }
    return {
        "Driver_ID": spec.driver_id,
        "Scope": {"app": spec.scope.app_id, "incident_scenario": spec.scope.incident_scenario},
        "Evidence_objects": [
            {
                "event": ev.event_label,
                "object_name": ev.object_name,
                "layout_id": ev.layout_id,
                "triggers": list(ev.trigger_ids),
            }
            for ev in spec.evidence_objects
        ],
        "Acquisition": spec.acquisition,
        "Triggers": [
            {
                "trigger_id": t.trigger_id,
                "hooked_function_name": t.hooked_function_name,
                "level": t.level,
                "trigger_class": t.trigger_class,
                "predicate": t.predicate_id,
            }
            for t in spec.triggers
        ],
        "Sampling_strategy": sampling,
        "Log_location": spec.log_location,
        "Globals": dict(spec.globals),
    }


def save_driver_config(spec: DriverSpec, path: Path | str) -> None:
    Path(path).write_text(
        yaml.safe_dump(driver_config_doc(spec), sort_keys=False), encoding="utf-8"
    )
