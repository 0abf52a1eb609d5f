"""Reading and writing tab-separated search logs, and grouping events into sequences."""

from __future__ import annotations

import io
import logging
from collections import defaultdict
from pathlib import Path
from typing import BinaryIO, Iterable, TextIO

from .types import EventLog, SearchEvent, SearchSequence, SequenceSet

_log = logging.getLogger(__name__)

COLUMNS = ("physician_id", "patient_id", "visit_id", "timestamp", "term")


class LogFormatError(ValueError):
    """Raised for a malformed log line; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _lines(source) -> Iterable[str]:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"), newline=None)
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8").splitlines()
    if isinstance(source, io.TextIOBase):
        return source
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8")


def parse_log(
    source: bytes | str | Path | BinaryIO | TextIO,
    *,
    has_header: bool = False,
    lowercase_terms: bool = False,
) -> EventLog:
    """Parse a 5-column TSV search log.

    ``source`` may be raw bytes, a path, or an open (text or binary) stream.
    Blank lines are ignored. Events are returned in input order, which later
    serves as the tie-break for equal timestamps.
    """
    events: EventLog = []
    for lineno, raw in enumerate(_lines(source), start=1):
        line = raw.rstrip("\r\n")
        if has_header and lineno == 1:
            continue
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != len(COLUMNS):
            raise LogFormatError(lineno, f"expected {len(COLUMNS)} columns, got {len(cols)}")
        phys, pat, visit, stamp, term = (c.strip() for c in cols)
        if lowercase_terms:
            term = term.lower()
        try:
            ts = int(stamp)
        except ValueError:
            raise LogFormatError(lineno, f"unparsable timestamp {stamp!r}") from None
        if ts < 0:
            raise LogFormatError(lineno, f"negative timestamp {ts}")
        for name, value in zip(COLUMNS, (phys, pat, visit, stamp, term)):
            if not value:
                raise LogFormatError(lineno, f"empty {name}")
        events.append(SearchEvent(phys, pat, visit, ts, term))
    _log.debug("parsed %d events", len(events))
    return events


def format_log(events: Iterable[SearchEvent], *, header: bool = False) -> str:
    out = io.StringIO()
    if header:
        out.write("\t".join(COLUMNS) + "\n")
    for e in events:
        out.write(f"{e.physician_id}\t{e.patient_id}\t{e.visit_id}\t{e.timestamp}\t{e.term}\n")
    return out.getvalue()


def build_sequences(events: Iterable[SearchEvent]) -> SequenceSet:
    """Group events by (physician, patient, visit) and order each group in time.

    Sorting is stable, so events sharing a timestamp keep their input order.
    Repeated terms are kept as-is. Sequences appear in order of first event.
    """
    groups: dict[tuple[str, str, str], list[SearchEvent]] = defaultdict(list)
    for e in events:
        groups[(e.physician_id, e.patient_id, e.visit_id)].append(e)
    seqs = []
    for (y, p, v), evs in groups.items():
        evs = sorted(evs, key=lambda e: e.timestamp)
        seqs.append(SearchSequence(y, p, v, tuple((e.term, e.timestamp) for e in evs)))
    return SequenceSet.of(seqs)
