"""Built-in object layouts and driver presets for the simulated apps.

Three app models, each with its own in-memory message encoding and the pair
of driver triggers that matter for it: the call used when a message leaves
the device, and the call used when a chat or sync is (re)loaded.
"""

from __future__ import annotations

from ..carver import DEFAULT_REGISTRY, ObjectLayout
from ..driver import (
    DriverSpec,
    EvidenceObjectSpec,
    SamplingStrategy,
    Scope,
    TriggerSpec,
)

CLOUD_MESSAGE = ObjectLayout(
    layout_id="cloud_message",
    magic=b"CMO1",
    type_tag=0x0101,
    field_schema=(("peer", "utf8"), ("content", "utf8"), ("sent", "bool"), ("ts", "u64")),
)

LOCAL_MESSAGE = ObjectLayout(
    layout_id="local_message",
    magic=b"LMO1",
    type_tag=0x0201,
    field_schema=(("peer", "utf8"), ("content", "utf8"), ("sent", "bool"), ("ts", "u64")),
)

# Push payloads carry no direction flag; the event label decides that.
PUSH_PAYLOAD = ObjectLayout(
    layout_id="push_payload",
    magic=b"PBO1",
    type_tag=0x0301,
    field_schema=(("peer", "utf8"), ("content", "utf8"), ("kind", "utf8"), ("ts", "u64")),
)

for _layout in (CLOUD_MESSAGE, LOCAL_MESSAGE, PUSH_PAYLOAD):
    DEFAULT_REGISTRY.register(_layout)

LOG_LOCATION = "jitmflogs"

APP_MODELS = ("cloud_messenger", "local_messenger", "sms_bridge")
ATTACK_KINDS = ("crime_proxy", "interception")

# (send trigger, load trigger) per app model.
_TRIGGERS: dict[str, tuple[TriggerSpec, TriggerSpec]] = {
    "cloud_messenger": (
        TriggerSpec("t-send", "send", "native", "network"),
        TriggerSpec("t-recv", "recv", "native", "network"),
    ),
    "local_messenger": (
        TriggerSpec("t-write", "write", "native", "storage"),
        TriggerSpec("t-open", "open", "native", "storage"),
    ),
    "sms_bridge": (
        TriggerSpec("t-write", "write", "native", "storage"),
        TriggerSpec(
            "t-parcel",
            "android.content.Intent.createFromParcel",
            "rt",
            "transform",
        ),
    ),
}

_LAYOUTS = {
    "cloud_messenger": "cloud_message",
    "local_messenger": "local_message",
    "sms_bridge": "push_payload",
}

_LABELS = {
    ("cloud_messenger", "sent"): "Cloud Message Sent",
    ("cloud_messenger", "intercept"): "Cloud Chat Intercepted",
    ("local_messenger", "sent"): "Local Message Sent",
    ("local_messenger", "intercept"): "Local Chat Intercepted",
    ("sms_bridge", "sent"): "SMS Message Sent",
    ("sms_bridge", "intercept"): "SMS Chat Intercepted",
}


def build_driver(
    app_model: str,
    attack_kind: str,
    *,
    sampling: SamplingStrategy | None = None,
    acquisition: str = "online",
    driver_id: str | None = None,
) -> DriverSpec:
    """Driver watching the calls that matter for one (app, incident) pair.

    Crime-proxy incidents hinge on messages leaving the device, so evidence
    hangs off the send-path trigger; interception incidents hinge on chats
    being pulled in, so it hangs off the load-path trigger.
    """
    if app_model not in APP_MODELS:
        raise ValueError(f"unknown app model {app_model!r}")
    if attack_kind not in ATTACK_KINDS:
        raise ValueError(f"unknown attack kind {attack_kind!r}")

    send_trigger, load_trigger = _TRIGGERS[app_model]
    layout_id = _LAYOUTS[app_model]
    if attack_kind == "crime_proxy":
        label = _LABELS[(app_model, "sent")]
        watched = send_trigger
    else:
        label = _LABELS[(app_model, "intercept")]
        watched = load_trigger

    driver_id = driver_id or f"{app_model}-{attack_kind}"
    return DriverSpec(
        driver_id=driver_id,
        scope=Scope(app_id=app_model, incident_scenario=attack_kind),
        evidence_objects=(
            EvidenceObjectSpec(
                event_label=label,
                object_name=layout_id,
                layout_id=layout_id,
                trigger_ids=(watched.trigger_id,),
            ),
        ),
        acquisition=acquisition,
        triggers=(watched,),
        sampling=sampling or SamplingStrategy.always(),
        log_location=LOG_LOCATION,
        globals={},
    )
