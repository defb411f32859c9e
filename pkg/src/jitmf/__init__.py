"""Just-in-time memory forensics toolkit.

Declarative drivers hook simulated app activity, dump in-memory message
objects at trigger time, and feed a merged forensic timeline whose quality
is scored against scripted ground truth.
"""

from .carver import (
    DEFAULT_REGISTRY,
    DumpRecord,
    LayoutRegistry,
    MalformedObject,
    ObjectLayout,
    UnknownLayout,
    carve_objects,
    encode_object,
    parse_object,
)
from .driver import (
    DriverEngine,
    DriverInitFailure,
    DriverSpec,
    EvidenceObjectSpec,
    FireKind,
    SamplingStrategy,
    Scope,
    TriggerSpec,
    sampling_gate,
)
from .driverconfig import ConfigError, load_driver_config, parse_driver_config, save_driver_config
from .knowledge import (
    CorrelationMode,
    EmptySeed,
    KnowledgeEvent,
    KnowledgeModel,
    SeedEvent,
    populate_model,
)
from .metrics import (
    MatchingCriteria,
    TimelineComparison,
    TruthEvent,
    compare_timeline,
    jaccard_dissimilarity,
    kendall_tau,
    load_ground_truth,
    match_events,
)
from .report import CasePreset, build_report, compare_run, run_pipeline
from .sources import (
    ParseResult,
    SuperTimeline,
    TimelineEntry,
    build_super_timeline,
    merge_super_timeline,
    read_super_timeline,
    write_super_timeline,
)

__version__ = "0.1.0"

__all__ = [
    "CasePreset",
    "ConfigError",
    "CorrelationMode",
    "DEFAULT_REGISTRY",
    "DriverEngine",
    "DriverInitFailure",
    "DriverSpec",
    "DumpRecord",
    "EmptySeed",
    "EvidenceObjectSpec",
    "FireKind",
    "KnowledgeEvent",
    "KnowledgeModel",
    "LayoutRegistry",
    "MalformedObject",
    "MatchingCriteria",
    "ObjectLayout",
    "ParseResult",
    "SamplingStrategy",
    "Scope",
    "SeedEvent",
    "SuperTimeline",
    "TimelineComparison",
    "TimelineEntry",
    "TriggerSpec",
    "TruthEvent",
    "UnknownLayout",
    "build_report",
    "build_super_timeline",
    "carve_objects",
    "compare_run",
    "compare_timeline",
    "encode_object",
    "jaccard_dissimilarity",
    "kendall_tau",
    "load_driver_config",
    "load_ground_truth",
    "match_events",
    "merge_super_timeline",
    "parse_driver_config",
    "parse_object",
    "populate_model",
    "read_super_timeline",
    "run_pipeline",
    "sampling_gate",
    "save_driver_config",
    "write_super_timeline",
]
