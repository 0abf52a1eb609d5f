"""Next-search-term recommendation from clinical search logs.

Blends a first-order Markov model of search transitions with collaborative
filtering over similar physicians, patients and terms, and evaluates the
result with a temporal cut-off protocol.
"""

from .core import (
    LogFormatError,
    SearchEvent,
    SearchSequence,
    SequenceSet,
    StatsReport,
    SynthConfig,
    TestCase,
    build_sequences,
    corpus_stats,
    cutoff_split,
    parse_log,
    synth_generate,
)
from .evaluation import MethodConfig, MetricsReport, SweepGrid, build_models, evaluate, sweep
from .hybrid import Recommendation, ScoreVector, blend, recommend_topn

__version__ = "0.1.0"

__all__ = [
    "LogFormatError",
    "MethodConfig",
    "MetricsReport",
    "Recommendation",
    "ScoreVector",
    "SearchEvent",
    "SearchSequence",
    "SequenceSet",
    "StatsReport",
    "SweepGrid",
    "SynthConfig",
    "TestCase",
    "blend",
    "build_models",
    "build_sequences",
    "corpus_stats",
    "cutoff_split",
    "evaluate",
    "parse_log",
    "recommend_topn",
    "sweep",
    "synth_generate",
]
