"""Timeline quality metrics against ground truth.

Matching is greedy and injective: attack truth events are visited in time
order and each claims the earliest still-unclaimed generated event that is
eligible under the matching criteria. Everything downstream (precision,
recall, set dissimilarity, order distance, time deviation) is computed from
those pairs.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

MATCH_KINDS = ("content_presence", "sent_to_subject", "chat_activity_for_subject")


class GeneratedEvent(Protocol):
    """Anything timeline-shaped: model events and parsed entries both fit."""

    @property
    def time(self) -> float: ...

    @property
    def event_type(self) -> str: ...

    @property
    def subject(self) -> str: ...

    @property
    def object(self) -> str: ...


@dataclass(frozen=True)
class TruthEvent:
    ts_ms: int
    event_type: str
    subject: str
    object: str
    attack: bool

    @property
    def time(self) -> float:
        return self.ts_ms / 1000.0


def load_ground_truth(path: Path | str) -> list[TruthEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            events.append(
                TruthEvent(
                    ts_ms=int(doc["ts_ms"]),
                    event_type=doc["event_type"],
                    subject=doc["subject"],
                    object=doc["object"],
                    attack=bool(doc["attack"]),
                )
            )
    return events


@dataclass(frozen=True)
class MatchingCriteria:
    """Eligibility rule linking a truth event to a generated event.

    content_presence: the truth object text appears inside the generated
    object. sent_to_subject: an outgoing-message event for the truth's peer.
    chat_activity_for_subject: an interception event for the truth's peer.
    An optional pinned subject restricts both sides to that peer.
    """

    kind: str
    subject: str = ""

    def __post_init__(self) -> None:
        if self.kind not in MATCH_KINDS:
            raise ValueError(f"unknown matching criteria {self.kind!r}")

    def eligible(self, truth: TruthEvent, generated: GeneratedEvent) -> bool:
        if self.subject and truth.subject != self.subject:
            return False
        if self.kind == "content_presence":
            return bool(truth.object) and truth.object in generated.object
        if self.kind == "sent_to_subject":
            return generated.event_type == "message_sent" and generated.subject == truth.subject
        return generated.event_type == "chat_intercepted" and generated.subject == truth.subject


@dataclass(frozen=True)
class MatchPair:
    truth: TruthEvent
    generated: GeneratedEvent
    generated_pos: int

    @property
    def deviation_s(self) -> float:
        return abs(self.generated.time - self.truth.time)


def match_events(
    generated: Sequence[GeneratedEvent],
    truth: Sequence[TruthEvent],
    criteria: MatchingCriteria,
) -> list[MatchPair]:
    """Injective greedy assignment.

    Generated events are ranked by (time, input position); input position
    carries the merge precedence for equal times, so ties resolve the same
    way every run.
    """
    ranked = sorted(range(len(generated)), key=lambda i: (generated[i].time, i))
    used: set[int] = set()
    pairs: list[MatchPair] = []
    for t in sorted(truth, key=lambda t: t.ts_ms):
        for idx in ranked:
            if idx in used:
                continue
            if criteria.eligible(t, generated[idx]):
                used.add(idx)
                pairs.append(MatchPair(t, generated[idx], idx))
                break
    return pairs


def precision_recall(matched: int, generated_total: int, truth_total: int) -> tuple[float | None, float | None]:
    precision = None if generated_total == 0 else matched / generated_total
    recall = None if truth_total == 0 else matched / truth_total
    return precision, recall


def jaccard_dissimilarity(found: set, expected: set) -> float:
    union = found | expected
    if not union:
        return 0.0
    return 1.0 - len(found & expected) / len(union)


def _count_inversions(seq: list[int]) -> int:
    """Merge-sort inversion count; quadratic pair counting stays in tests."""
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    count = _count_inversions(left) + _count_inversions(right)
    merged, i, j = [], 0, 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            count += len(left) - i
            merged.append(right[j])
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return count


def kendall_tau(order_a: Sequence, order_b: Sequence) -> tuple[int, float]:
    """Discordant-pair distance between two orderings of the same items.

    Returns the raw count and its fraction of all item pairs; fewer than two
    items means zero distance.
    """
    if sorted(order_a, key=repr) != sorted(order_b, key=repr):
        raise ValueError("orderings must contain the same items")
    n = len(order_a)
    if n < 2:
        return 0, 0.0
    rank = {item: i for i, item in enumerate(order_a)}
    if len(rank) != n:
        raise ValueError("orderings must not repeat items")
    raw = _count_inversions([rank[item] for item in order_b])
    return raw, raw / (n * (n - 1) / 2)


@dataclass(frozen=True)
class TimeDeviation:
    mean_s: float
    stdev_s: float
    max_s: float
    count: int

    @classmethod
    def of(cls, deviations: Sequence[float]) -> "TimeDeviation":
        if not deviations:
            return cls(0.0, 0.0, 0.0, 0)
        return cls(
            mean_s=statistics.mean(deviations),
            stdev_s=statistics.pstdev(deviations),
            max_s=max(deviations),
            count=len(deviations),
        )


@dataclass
class TimelineComparison:
    criteria: MatchingCriteria
    generated_total: int
    truth_total: int
    matched: int
    precision: float | None
    recall: float | None
    jaccard: float
    kendall_raw: int
    kendall_normalized: float
    deviation: TimeDeviation
    pairs: list[MatchPair] = field(default_factory=list)

    @staticmethod
    def format_ratio(value: float | None) -> str:
        return "-" if value is None else "%.6f" % value


def compare_timeline(
    generated: Sequence[GeneratedEvent],
    truth: Sequence[TruthEvent],
    criteria: MatchingCriteria,
    *,
    attack_only: bool = True,
) -> TimelineComparison:
    """Score a generated timeline against truth under one criteria."""
    relevant = [t for t in truth if t.attack] if attack_only else list(truth)
    relevant.sort(key=lambda t: t.ts_ms)
    pairs = match_events(generated, relevant, criteria)

    precision, recall = precision_recall(len(pairs), len(generated), len(relevant))
    found = {p.truth.ts_ms for p in pairs}
    expected = {t.ts_ms for t in relevant}
    jaccard = jaccard_dissimilarity(found, expected)

    truth_order = [p.truth.ts_ms for p in sorted(pairs, key=lambda p: p.truth.ts_ms)]
    generated_order = [
        p.truth.ts_ms for p in sorted(pairs, key=lambda p: (p.generated.time, p.generated_pos))
    ]
    kendall_raw, kendall_norm = kendall_tau(truth_order, generated_order)

    return TimelineComparison(
        criteria=criteria,
        generated_total=len(generated),
        truth_total=len(relevant),
        matched=len(pairs),
        precision=precision,
        recall=recall,
        jaccard=jaccard,
        kendall_raw=kendall_raw,
        kendall_normalized=kendall_norm,
        deviation=TimeDeviation.of([p.deviation_s for p in pairs]),
        pairs=pairs,
    )
