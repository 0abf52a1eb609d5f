from .logs import LogFormatError, build_sequences, format_log, parse_log
from .split import cutoff_split
from .stats import StatsReport, corpus_stats
from .synth import SynthConfig, synth_generate
from .types import EventLog, SearchEvent, SearchSequence, SequenceSet, TestCase

__all__ = [
    "EventLog",
    "LogFormatError",
    "SearchEvent",
    "SearchSequence",
    "SequenceSet",
    "StatsReport",
    "SynthConfig",
    "TestCase",
    "build_sequences",
    "corpus_stats",
    "cutoff_split",
    "format_log",
    "parse_log",
    "synth_generate",
]
