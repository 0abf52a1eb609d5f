"""Domain types for search logs: events, per-visit sequences, and test cases."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


@dataclass(frozen=True)
class SearchEvent:
    """One search action: ``physician`` searched ``term`` on ``patient`` during ``visit``."""

    physician_id: str
    patient_id: str
    visit_id: str
    timestamp: int
    term: str

    def __post_init__(self):
        for name in ("physician_id", "patient_id", "visit_id", "term"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if self.timestamp < 0:
            raise ValueError(f"timestamp must be >= 0, got {self.timestamp}")


EventLog = list[SearchEvent]
SequenceKey = tuple[str, str, str]


@dataclass(frozen=True)
class SearchSequence:
    """The ordered terms one physician searched on one patient during one visit.

    ``terms`` holds ``(term, timestamp)`` pairs, already in search order.
    """

    physician_id: str
    patient_id: str
    visit_id: str
    terms: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a search sequence must contain at least one term")
        stamps = [ts for _, ts in self.terms]
        if any(a > b for a, b in zip(stamps, stamps[1:])):
            raise ValueError("sequence timestamps must be non-decreasing")

    @property
    def key(self) -> SequenceKey:
        return (self.physician_id, self.patient_id, self.visit_id)

    @property
    def term_list(self) -> list[str]:
        return [t for t, _ in self.terms]

    @property
    def max_timestamp(self) -> int:
        return self.terms[-1][1]

    def __len__(self):
        return len(self.terms)


@dataclass(frozen=True)
class SequenceSet:
    """All search sequences of a corpus, with entity and vocabulary indexes."""

    sequences: tuple[SearchSequence, ...]
    vocabulary: frozenset[str] = field(init=False)
    physicians: frozenset[str] = field(init=False)
    patients: frozenset[str] = field(init=False)

    def __post_init__(self):
        seen = set()
        for seq in self.sequences:
            if seq.key in seen:
                raise ValueError(f"duplicate sequence for {seq.key}")
            seen.add(seq.key)
        object.__setattr__(
            self, "vocabulary", frozenset(t for s in self.sequences for t, _ in s.terms)
        )
        object.__setattr__(self, "physicians", frozenset(s.physician_id for s in self.sequences))
        object.__setattr__(self, "patients", frozenset(s.patient_id for s in self.sequences))

    @classmethod
    def of(cls, sequences: Iterable[SearchSequence]) -> SequenceSet:
        return cls(tuple(sequences))

    @property
    def max_timestamp(self) -> int:
        """Latest timestamp in the set, or -1 when empty (used as a leakage watermark)."""
        return max((s.max_timestamp for s in self.sequences), default=-1)

    def __len__(self):
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)


@dataclass(frozen=True)
class TestCase:
    """A held-out query: the pre-cutoff context of a sequence and its first post-cutoff term."""

    __test__ = False  # keep pytest from collecting this class

    physician_id: str
    patient_id: str
    visit_id: str
    context: tuple[tuple[str, int], ...]
    target: str
    target_timestamp: int

    def __post_init__(self):
        if not self.context:
            raise ValueError("test case context must be non-empty")

    @property
    def last_term(self) -> str:
        return self.context[-1][0]
