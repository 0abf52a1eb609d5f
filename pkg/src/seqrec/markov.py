"""First-order Markov chain over search terms, pooled over all physicians and patients."""

from __future__ import annotations

import io
import logging
from collections import defaultdict
from dataclasses import dataclass

from .core.types import SequenceSet
from .hybrid import ScoreVector

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransitionModel:
    """Transition counts ``counts[from][to]`` and their row totals.

    ``watermark`` is the latest training timestamp the model saw (-1 if none).
    """

    counts: dict[str, dict[str, int]]
    row_totals: dict[str, int]
    vocabulary: frozenset[str]
    watermark: int = -1

    def probability(self, src: str, dst: str) -> float:
        total = self.row_totals.get(src)
        if not total:
            return 0.0
        return self.counts[src].get(dst, 0) / total

    def merge(self, other: TransitionModel) -> TransitionModel:
        counts: dict[str, dict[str, int]] = {k: dict(v) for k, v in self.counts.items()}
        for src, row in other.counts.items():
            dst_row = counts.setdefault(src, {})
            for dst, c in row.items():
                dst_row[dst] = dst_row.get(dst, 0) + c
        return TransitionModel(
            counts,
            {src: sum(row.values()) for src, row in counts.items()},
            self.vocabulary | other.vocabulary,
            max(self.watermark, other.watermark),
        )

    def to_tsv(self) -> str:
        """Dump ``term_i  term_j  count  probability`` rows sorted by (term_i, term_j)."""
        out = io.StringIO()
        for src in sorted(self.counts):
            row = self.counts[src]
            for dst in sorted(row):
                out.write(f"{src}\t{dst}\t{row[dst]}\t{row[dst] / self.row_totals[src]!r}\n")
        return out.getvalue()


def build_transition_model(train: SequenceSet) -> TransitionModel:
    counts: dict[str, dict[str, int]] = defaultdict(dict)
    for seq in train:
        terms = seq.term_list
        for src, dst in zip(terms, terms[1:]):
            row = counts[src]
            row[dst] = row.get(dst, 0) + 1
    totals = {src: sum(row.values()) for src, row in counts.items()}
    _log.debug("transition model: %d source terms, %d transitions", len(totals), sum(totals.values()))
    return TransitionModel(dict(counts), totals, train.vocabulary, train.max_timestamp)


def score_fomc(model: TransitionModel, last_term: str) -> ScoreVector:
    """Score each next term by P(term | last_term); unseen sources are cold starts."""
    row = model.counts.get(last_term)
    if not row:
        return ScoreVector({}, "foMC", cold_start=True)
    total = model.row_totals[last_term]
    return ScoreVector({t: c / total for t, c in row.items()}, "foMC")
