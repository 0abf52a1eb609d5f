"""Corpus statistics: entity counts, sequence lengths and their distributions."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .types import SequenceSet

_log = logging.getLogger(__name__)


@dataclass
class StatsReport:
    n_patients: int
    n_physicians: int
    n_terms: int
    n_sequences: int
    total_sequence_length: int
    avg_len_per_patient: float
    avg_len_per_sequence: float
    sequence_length_histogram: dict[int, int] = field(default_factory=dict)
    unique_terms_per_patient_histogram: dict[int, int] = field(default_factory=dict)
    warning: str | None = None

    def to_dict(self) -> dict:
        """JSON-ready form; averages rounded to 3 decimals, histogram keys as strings."""
        d = {
            "n_patients": self.n_patients,
            "n_physicians": self.n_physicians,
            "n_terms": self.n_terms,
            "n_sequences": self.n_sequences,
            "total_sequence_length": self.total_sequence_length,
            "avg_len_per_patient": round(self.avg_len_per_patient, 3),
            "avg_len_per_sequence": round(self.avg_len_per_sequence, 3),
            "sequence_length_histogram": {
                str(k): v for k, v in sorted(self.sequence_length_histogram.items())
            },
            "unique_terms_per_patient_histogram": {
                str(k): v for k, v in sorted(self.unique_terms_per_patient_histogram.items())
            },
        }
        if self.warning:
            d["warning"] = self.warning
        return d


def corpus_stats(seqs: SequenceSet) -> StatsReport:
    if not len(seqs):
        _log.warning("corpus is empty; statistics are all zero")
        return StatsReport(0, 0, 0, 0, 0, 0.0, 0.0, warning="empty corpus")

    total = sum(len(s) for s in seqs)
    patient_terms: dict[str, set[str]] = defaultdict(set)
    for s in seqs:
        patient_terms[s.patient_id].update(s.term_list)

    return StatsReport(
        n_patients=len(seqs.patients),
        n_physicians=len(seqs.physicians),
        n_terms=len(seqs.vocabulary),
        n_sequences=len(seqs),
        total_sequence_length=total,
        avg_len_per_patient=total / len(seqs.patients),
        avg_len_per_sequence=total / len(seqs),
        sequence_length_histogram=dict(Counter(len(s) for s in seqs)),
        unique_terms_per_patient_histogram=dict(Counter(len(ts) for ts in patient_terms.values())),
    )
