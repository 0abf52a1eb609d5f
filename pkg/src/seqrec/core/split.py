"""Temporal cut-off split of a corpus into training sequences and held-out queries."""

from __future__ import annotations

import logging

from .types import SearchSequence, SequenceSet, TestCase

_log = logging.getLogger(__name__)


def cutoff_split(seqs: SequenceSet, cutoff: int) -> tuple[SequenceSet, list[TestCase]]:
    """Split every sequence at ``cutoff`` (epoch seconds).

    Terms strictly before the cutoff train the models. A sequence with no
    pre-cutoff term is discarded entirely; a sequence with a pre-cutoff prefix
    and at least one later term yields exactly one test case, whose target is
    the first post-cutoff term.
    """
    if cutoff <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")

    train: list[SearchSequence] = []
    tests: list[TestCase] = []
    for seq in seqs:
        n_before = sum(1 for _, ts in seq.terms if ts < cutoff)
        if n_before == 0:
            continue
        prefix = seq.terms[:n_before]
        train.append(SearchSequence(seq.physician_id, seq.patient_id, seq.visit_id, prefix))
        if n_before < len(seq.terms):
            target, target_ts = seq.terms[n_before]
            tests.append(
                TestCase(seq.physician_id, seq.patient_id, seq.visit_id, prefix, target, target_ts)
            )

    _log.info(
        "cutoff %d: %d training sequences, %d test cases (from %d sequences)",
        cutoff,
        len(train),
        len(tests),
        len(seqs),
    )
    return SequenceSet.of(train), tests
