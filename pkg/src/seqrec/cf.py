"""Collaborative-filtering scorers over neighbor physicians, patients and terms.

``score_ypcf`` scores the terms that similar physicians searched on similar
patients, using mean-centered triplet frequencies. ``score_tptcf`` scores the
terms that followed, on similar patients, a term similar to the last search.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass

from .core.types import SequenceSet
from .hybrid import ScoreVector
from .similarity import NeighborSets, ProfileStore, similar_terms

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TripletStore:
    """``pairs[(physician, patient)][term]`` = how often the physician searched the term
    on the patient, over all visits."""

    pairs: dict[tuple[str, str], dict[str, int]]
    watermark: int = -1

    def freq(self, y: str, p: str, t: str) -> int:
        return self.pairs.get((y, p), {}).get(t, 0)

    def per_pair_terms(self, y: str, p: str) -> frozenset[str]:
        return frozenset(self.pairs.get((y, p), ()))


@dataclass(frozen=True)
class PatientTransitionStore:
    """``g[patient][from_term][to_term]`` transition counts pooled over physicians and visits."""

    g: dict[str, dict[str, dict[str, int]]]
    watermark: int = -1

    def count(self, p: str, src: str, dst: str) -> int:
        return self.g.get(p, {}).get(src, {}).get(dst, 0)


def build_triplet_store(train: SequenceSet) -> TripletStore:
    pairs: dict[tuple[str, str], dict[str, int]] = defaultdict(dict)
    for seq in train:
        row = pairs[(seq.physician_id, seq.patient_id)]
        for t in seq.term_list:
            row[t] = row.get(t, 0) + 1
    return TripletStore(dict(pairs), train.max_timestamp)


def mean_pair_frequency(store: TripletStore, y: str, p: str) -> float:
    """Average frequency of the terms y searched on p; 0 for an unseen pair."""
    row = store.pairs.get((y, p))
    if not row:
        return 0.0
    return sum(row.values()) / len(row)


def score_ypcf(store: TripletStore, neighbors: NeighborSets, y: str, p: str) -> ScoreVector:
    """Baseline ``mean_pair_frequency(y, p)`` plus the similarity-weighted average of
    neighbor pairs' centered frequencies for each term.

    The weight normalizer for a term only sums over neighbor pairs that
    searched that term.
    """
    num: dict[str, float] = defaultdict(float)
    den: dict[str, float] = defaultdict(float)
    for z, sim_y in neighbors.similar_physicians:
        for q, sim_p in neighbors.similar_patients:
            row = store.pairs.get((z, q))
            if not row:
                continue
            mean = sum(row.values()) / len(row)
            w = sim_y * sim_p
            for t, f in row.items():
                num[t] += (f - mean) * w
                den[t] += w

    base = mean_pair_frequency(store, y, p)
    scores = {t: base + num[t] / den[t] for t in num if den[t] > 0}
    return ScoreVector(scores, "ypCF")


def build_patient_transitions(train: SequenceSet) -> PatientTransitionStore:
    g: dict[str, dict[str, dict[str, int]]] = {}
    for seq in train:
        by_src = g.setdefault(seq.patient_id, {})
        terms = seq.term_list
        for src, dst in zip(terms, terms[1:]):
            row = by_src.setdefault(src, {})
            row[dst] = row.get(dst, 0) + 1
    return PatientTransitionStore(g, train.max_timestamp)


def score_tptcf(
    gstore: PatientTransitionStore,
    profiles: ProfileStore,
    p: str,
    last_term: str,
    similar_patients: tuple[tuple[str, float], ...],
    beta: float,
) -> ScoreVector:
    """Aggregate, over similar patients, transitions into each term from terms similar
    to ``last_term``.

    For one neighbor patient and one destination term, source terms are
    weighted by their similarity to ``last_term`` and normalized by the total
    transition count into the destination from all similar source terms.
    Neighbor patients are weighted by their normalized similarity to ``p``.
    """
    sources = similar_terms(profiles, last_term, beta)
    total_sim = sum(s for _, s in similar_patients)
    if not sources or total_sim <= 0:
        return ScoreVector({}, "TptCF")

    scores: dict[str, float] = defaultdict(float)
    for q, sim_p in similar_patients:
        by_src = gstore.g.get(q)
        if not by_src:
            continue
        num: dict[str, float] = defaultdict(float)
        den: dict[str, int] = defaultdict(int)
        for src, sim_t in sources:
            for dst, c in by_src.get(src, {}).items():
                num[dst] += c * sim_t
                den[dst] += c
        weight = sim_p / total_sim
        for dst in num:
            scores[dst] += weight * (num[dst] / den[dst])
    return ScoreVector(dict(scores), "TptCF")
