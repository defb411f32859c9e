"""Knowledge model: storage, correlation modes, derived interception events."""

import pytest

import _properties as props
from jitmf.knowledge import (
    CorrelationMode,
    EmptySeed,
    KnowledgeModel,
    SeedEvent,
    populate_model,
)
from jitmf.report import MODEL_FILE
from jitmf.sources import TimelineEntry, build_super_timeline


def _entry(time_s, event_type, subject, obj, *, source="jitmf", granularity="fine", i=0):
    return TimelineEntry(time_s, source, "test", event_type, subject, obj, granularity, f"t:{i}")


def test_seed_event_rejects_empty() -> None:
    with pytest.raises(EmptySeed):
        SeedEvent()
    SeedEvent(subject="Alice")
    SeedEvent(keywords=("x",))
    SeedEvent(event_type="message_sent")


def test_create_and_reopen(tmp_path) -> None:
    entries = [
        _entry(1.0, "message_sent", "Alice", "hi", i=0),
        _entry(2.0, "message_received", "Bob", "yo", i=1),
    ]
    path = tmp_path / "m.db"
    model = populate_model(path, "run-x", 9000, entries)
    assert model.run_id == "run-x"
    assert model.clock_end_ms == 9000
    assert model.event_count() == 2
    model.close()

    with KnowledgeModel.open(path) as reopened:
        assert reopened.event_count() == 2
        assert [e.object for e in reopened.events()] == ["hi", "yo"]

    with pytest.raises(FileNotFoundError):
        KnowledgeModel.open(tmp_path / "absent.db")


def test_create_replaces_existing(tmp_path) -> None:
    path = tmp_path / "m.db"
    populate_model(path, "one", 0, [_entry(1.0, "x", "A", "o")]).close()
    model = populate_model(path, "two", 0, [])
    assert model.run_id == "two"
    assert model.event_count() == 0
    model.close()


def test_correlate_requires_mode_field(tmp_path) -> None:
    model = populate_model(tmp_path / "m.db", "r", 0, [])
    seed = SeedEvent(subject="Alice")
    model.correlate(seed, CorrelationMode.SUBJECT)
    with pytest.raises(ValueError):
        model.correlate(seed, CorrelationMode.OBJECT)
    with pytest.raises(ValueError):
        model.correlate(seed, "event_type")
    model.close()


def test_correlate_matches_linear_scan(a_run) -> None:
    """Each mode must agree with a brute-force pass over every event."""
    with KnowledgeModel.open(a_run / MODEL_FILE) as model:
        everything = model.events()
        seed = SeedEvent(subject="Alice", keywords=("Sending_Attack",), event_type="message_sent")

        by_subject = model.correlate(seed, "subject")
        assert [e.id for e in by_subject] == [e.id for e in everything if e.subject == "Alice"]

        by_object = model.correlate(seed, "object")
        expected = [
            e.id
            for e in everything
            if any(k.lower() in e.object.lower() for k in seed.keywords)
        ]
        assert [e.id for e in by_object] == expected

        by_type = model.correlate(seed, "event_type")
        assert [e.id for e in by_type] == [
            e.id for e in everything if e.event_type == "message_sent"
        ]


def test_correlate_subject_excludes_coarse(a_run) -> None:
    """Log and filestat lines carry no subject, so they stay out of the way."""
    with KnowledgeModel.open(a_run / MODEL_FILE) as model:
        hits = model.correlate(SeedEvent(subject="Alice"), "subject")
        assert hits
        assert all(e.granularity == "fine" for e in hits)
        coarse = model.correlate(SeedEvent(event_type="file_modified"), "event_type")
        assert coarse and all(e.granularity == "coarse" for e in coarse)


def test_events_filters(a_run) -> None:
    with KnowledgeModel.open(a_run / MODEL_FILE) as model:
        jitmf_only = model.events(source="jitmf")
        assert jitmf_only and all(e.source == "jitmf" for e in jitmf_only)
        early = model.events(until=60.0)
        late = model.events(since=60.0)
        assert len(early) + len(late) >= model.event_count()  # boundary may land in both
        assert model.events(limit=3) == model.events()[:3]
        times = [e.time for e in model.events()]
        assert times == sorted(times)


SUPPORT = [
    _entry(1.0, "message_received", "CEO", "alpha", source="message_db", i=100),
    _entry(1.5, "message_sent", "CEO", "beta", source="message_db", i=101),
]


def test_derive_needs_two_members(tmp_path) -> None:
    entries = SUPPORT + [_entry(10.0, "object_dumped", "CEO", "alpha", i=0)]
    model = populate_model(tmp_path / "m.db", "r", 0, entries)
    assert model.derive_interception_events(5000) == []
    model.close()


def test_derive_needs_strictly_earlier_support(tmp_path) -> None:
    """A dump at the same instant as the message is not yet interception."""
    entries = [
        _entry(10.0, "message_received", "CEO", "alpha", source="message_db", i=100),
        _entry(10.0, "object_dumped", "CEO", "alpha", i=0),
        _entry(10.0, "object_dumped", "CEO", "beta", i=1),
        _entry(9.0, "message_sent", "CEO", "beta", source="message_db", i=101),
    ]
    model = populate_model(tmp_path / "m.db", "r", 0, entries)
    assert model.derive_interception_events(5000) == []
    model.close()


def test_derive_groups_and_joins(tmp_path) -> None:
    entries = SUPPORT + [
        _entry(10.0, "object_dumped", "CEO", "alpha", i=0),
        _entry(12.0, "object_dumped", "CEO", "beta", i=1),
    ]
    model = populate_model(tmp_path / "m.db", "r", 0, entries)
    created = model.derive_interception_events(2000)
    assert len(created) == 1
    event = created[0]
    assert event.event_type == "chat_intercepted"
    assert event.subject == "CEO"
    assert event.time == 12.0  # the group's last sighting
    assert event.object == "alpha | beta"
    assert event.synthetic
    # derivation is idempotent
    assert model.derive_interception_events(2000) == []
    assert model.event_count(synthetic=True) == 1
    model.close()


def test_derive_window_splits_groups(tmp_path) -> None:
    entries = SUPPORT + [
        _entry(10.0, "object_dumped", "CEO", "alpha", i=0),
        _entry(20.0, "object_dumped", "CEO", "beta", i=1),
    ]
    model = populate_model(tmp_path / "m.db", "r", 0, entries)
    assert model.derive_interception_events(2000) == []  # 10 s gap, 2 s window
    model.close()

    model = populate_model(tmp_path / "m2.db", "r", 0, entries)
    created = model.derive_interception_events(10_000)
    assert [e.object for e in created] == ["alpha | beta"]
    model.close()


def test_derive_ignores_other_subjects(tmp_path) -> None:
    entries = SUPPORT + [
        _entry(10.0, "object_dumped", "CEO", "alpha", i=0),
        _entry(10.5, "object_dumped", "Mallory", "beta", i=1),
    ]
    model = populate_model(tmp_path / "m.db", "r", 0, entries)
    assert model.derive_interception_events(5000) == []
    model.close()


def test_derive_monotone_and_idempotent_seeded(tmp_path) -> None:
    for seed in range(6):
        props.check_derive_window_monotonicity(tmp_path / str(seed), seed)


def test_derive_on_interception_run(d_run) -> None:
    """The processed interception scenario carries its synthetic events."""
    with KnowledgeModel.open(d_run / MODEL_FILE) as model:
        synthetic = model.events(event_type="chat_intercepted", source="jitmf")
        derived = [e for e in synthetic if e.synthetic]
        assert len(derived) == 3
        assert all(e.subject == "CEO" for e in derived)
        assert all(" | " in e.object for e in derived)


def test_pipeline_model_counts_match_timeline(a_run) -> None:
    timeline = build_super_timeline(a_run)
    with KnowledgeModel.open(a_run / MODEL_FILE) as model:
        assert model.event_count(synthetic=False) == len(timeline.entries)
