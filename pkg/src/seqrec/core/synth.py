"""Seeded generator for synthetic search logs with a planted transition cycle.

Each sequence is one visit by a random physician on a random patient. Its
length is geometric; the first term is uniform, and every following term is
the cyclic successor of the current one with probability
``dominant_transition_prob`` and uniform otherwise.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .types import EventLog, SearchEvent

# 2013-01-24 00:00:00 UTC
DEFAULT_START = 1358985600
# 243 days, 2013-01-24 through 2013-09-24
DEFAULT_SPAN = 243 * 86400


@dataclass(frozen=True)
class SynthConfig:
    n_physicians: int = 880
    n_patients: int = 5700
    n_terms: int = 4000
    n_sequences: int = 10000
    seq_len_geometric_p: float = 0.347
    dominant_transition_prob: float = 0.5
    time_span: int = DEFAULT_SPAN
    start_time: int = DEFAULT_START
    max_gap: int = 3 * 86400

    def validate(self):
        for name in ("n_physicians", "n_patients", "n_terms", "n_sequences", "time_span", "max_gap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.start_time < 0:
            raise ValueError("start_time must be >= 0")
        if not 0.0 < self.seq_len_geometric_p <= 1.0:
            raise ValueError("seq_len_geometric_p must be in (0, 1]")
        if not 0.0 <= self.dominant_transition_prob <= 1.0:
            raise ValueError("dominant_transition_prob must be in [0, 1]")


def _width(n: int) -> int:
    return len(str(n - 1))


def synth_generate(config: SynthConfig, seed: int) -> EventLog:
    """Generate a log deterministically from ``(config, seed)``.

    Uses :class:`random.Random`, whose stream is stable across platforms and
    Python versions for the calls made here. Events are returned in timestamp
    order; within a sequence timestamps strictly increase.
    """
    config.validate()
    rng = random.Random(seed)
    wy, wp, wt, wv = (
        _width(config.n_physicians),
        _width(config.n_patients),
        _width(config.n_terms),
        _width(config.n_sequences),
    )

    rows: list[tuple[int, int, int, SearchEvent]] = []
    for s in range(config.n_sequences):
        y = f"Y{rng.randrange(config.n_physicians):0{wy}d}"
        p = f"P{rng.randrange(config.n_patients):0{wp}d}"
        v = f"V{s:0{wv}d}"

        length = 1
        while rng.random() >= config.seq_len_geometric_p:
            length += 1

        ts = config.start_time + rng.randrange(config.time_span)
        cur = rng.randrange(config.n_terms)
        for pos in range(length):
            if pos:
                ts += rng.randint(1, config.max_gap)
                if rng.random() < config.dominant_transition_prob:
                    cur = (cur + 1) % config.n_terms
                else:
                    cur = rng.randrange(config.n_terms)
            rows.append((ts, s, pos, SearchEvent(y, p, v, ts, f"t{cur:0{wt}d}")))

    rows.sort(key=lambda r: r[:3])
    return [r[3] for r in rows]
