"""Deterministic simulated Android-like device: process, apps, scenarios."""

from .apps import FLUSH_OFFSETS_MS, PROFILES, SimApp
from .artifacts import (
    DeviceArtifacts,
    FilestatTracker,
    GroundTruthLog,
    LogcatLog,
    MessageStore,
)
from .memory import BumpAllocator, MemorySegment, SimObject
from .presets import (
    APP_MODELS,
    ATTACK_KINDS,
    CLOUD_MESSAGE,
    LOCAL_MESSAGE,
    PUSH_PAYLOAD,
    build_driver,
)
from .process import SimProcess
from .scenario import (
    ATTACK_PEER,
    INTERCEPT_PEER,
    SCENARIO_PRESETS,
    ScenarioSpec,
    run_id_for,
    run_scenario,
)

__all__ = [
    "APP_MODELS",
    "ATTACK_KINDS",
    "ATTACK_PEER",
    "BumpAllocator",
    "CLOUD_MESSAGE",
    "DeviceArtifacts",
    "FLUSH_OFFSETS_MS",
    "FilestatTracker",
    "GroundTruthLog",
    "INTERCEPT_PEER",
    "LOCAL_MESSAGE",
    "LogcatLog",
    "MemorySegment",
    "MessageStore",
    "PROFILES",
    "PUSH_PAYLOAD",
    "SCENARIO_PRESETS",
    "ScenarioSpec",
    "SimApp",
    "SimObject",
    "SimProcess",
    "build_driver",
    "run_id_for",
    "run_scenario",
]
