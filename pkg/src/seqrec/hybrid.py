"""Linear blending of dynamics and collaborative scores, and top-N ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping


@dataclass(frozen=True)
class ScoreVector:
    """Scores for candidate next terms.

    A term missing from ``scores`` is unscored, which is not the same as a
    score of 0: unscored terms are never recommended.
    """

    scores: dict[str, float] = field(default_factory=dict)
    provenance: str = ""
    cold_start: bool = False

    def __post_init__(self):
        for t, s in self.scores.items():
            if not math.isfinite(s):
                raise ValueError(f"non-finite score {s!r} for term {t!r}")

    def __len__(self):
        return len(self.scores)

    def get(self, term: str, default: float = 0.0) -> float:
        return self.scores.get(term, default)


@dataclass(frozen=True)
class Recommendation:
    ranked_terms: tuple[tuple[str, float], ...]

    @property
    def terms(self) -> list[str]:
        return [t for t, _ in self.ranked_terms]

    def to_dict(self, query: Mapping | None = None) -> dict:
        return {
            "query": dict(query or {}),
            "topn": [{"term": t, "score": s} for t, s in self.ranked_terms],
        }


def minmax(sv: ScoreVector) -> ScoreVector:
    """Rescale scores to [0, 1]; a constant non-empty vector maps to all ones."""
    if not sv.scores:
        return sv
    lo, hi = min(sv.scores.values()), max(sv.scores.values())
    if hi == lo:
        scaled = {t: 1.0 for t in sv.scores}
    else:
        scaled = {t: (s - lo) / (hi - lo) for t, s in sv.scores.items()}
    return ScoreVector(scaled, sv.provenance, sv.cold_start)


def blend(alpha: float, dyn: ScoreVector, cf: ScoreVector, *, normalize: bool = False) -> ScoreVector:
    """``(1 - alpha) * dyn + alpha * cf`` over the scored terms.

    A term absent from one component counts as 0 there. A component with zero
    weight contributes no candidates, so ``alpha=0`` reproduces ``dyn`` and
    ``alpha=1`` reproduces ``cf`` exactly, support included.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if normalize:
        dyn, cf = minmax(dyn), minmax(cf)

    w_dyn, w_cf = 1.0 - alpha, alpha
    support: dict[str, None] = {}
    if w_dyn > 0:
        support.update(dict.fromkeys(dyn.scores))
    if w_cf > 0:
        support.update(dict.fromkeys(cf.scores))

    scores = {}
    for t in support:
        if w_cf == 0:
            scores[t] = dyn.scores[t]
        elif w_dyn == 0:
            scores[t] = cf.scores[t]
        else:
            scores[t] = w_dyn * dyn.get(t) + w_cf * cf.get(t)
    return ScoreVector(scores, f"blend({dyn.provenance},{cf.provenance})", dyn.cold_start)


def recommend_topn(
    scores: ScoreVector, n: int, freq_tiebreak: Mapping[str, int] | None = None
) -> Recommendation:
    """Rank scored terms: score desc, then training frequency desc, then term asc."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    freq = freq_tiebreak or {}
    ranked = sorted(scores.scores.items(), key=lambda kv: (-kv[1], -freq.get(kv[0], 0), kv[0]))
    return Recommendation(tuple(ranked[:n]))
