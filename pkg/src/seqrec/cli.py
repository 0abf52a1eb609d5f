"""``seqrec`` command line: stats, synth, recommend, evaluate, sweep.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
Diagnostics go to stderr; results go to stdout or ``--out``.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import os
import sys
from pathlib import Path

from .core import (
    LogFormatError,
    SynthConfig,
    build_sequences,
    corpus_stats,
    cutoff_split,
    format_log,
    parse_log,
    synth_generate,
)
from .evaluation import (
    DEFAULT_NS,
    METHODS,
    MethodConfig,
    SweepGrid,
    TrainingLeakError,
    best_per_method,
    build_models,
    evaluate,
    recommend,
    reports_to_json,
    reports_to_tsv,
    sweep,
)
from .markov import score_fomc
from .similarity import build_profiles, similarity_distribution

_log = logging.getLogger("seqrec")

LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_cutoff(text: str) -> int:
    """Epoch seconds, or an ISO-8601 date/datetime (naive values are taken as UTC)."""
    text = text.strip()
    if text.lstrip("-").isdigit():
        return int(text)
    try:
        when = dt.datetime.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid cutoff {text!r}") from None
    if when.tzinfo is None:
        when = when.replace(tzinfo=dt.timezone.utc)
    return int(when.timestamp())


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _add_log_args(p: argparse.ArgumentParser):
    p.add_argument("--log", required=True, type=Path, help="TSV search log")
    p.add_argument("--has-header", action="store_true", help="skip the first line of the log")
    p.add_argument("--lowercase", action="store_true", help="lowercase search terms")


def _add_method_args(p: argparse.ArgumentParser, normalize: bool = False):
    p.add_argument(
        "--method",
        required=True,
        help="one of " + ", ".join(m.lower() for m in METHODS),
    )
    p.add_argument("--sim", help="neighbor order for ypCF methods: p2y or y2p")
    p.add_argument("--alpha", type=float, help="weight on the CF component (DmCF methods)")
    p.add_argument("--kp", type=int, help="number of similar patients")
    p.add_argument("--ky", type=int, help="number of similar physicians (ypCF methods)")
    p.add_argument("--beta", type=float, help="term similarity threshold (TptCF methods)")
    if normalize:
        p.add_argument(
            "--normalize",
            action="store_true",
            help="min-max scale each component per query before blending",
        )


def _add_output_args(p: argparse.ArgumentParser, formats: bool = True):
    p.add_argument("--out", type=Path, help="write output here instead of stdout")
    if formats:
        p.add_argument("--format", choices=("tsv", "json"), default="tsv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seqrec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", help="corpus statistics as JSON")
    _add_log_args(p)
    p.add_argument(
        "--similarity",
        action="store_true",
        help="also report nonzero fractions and histograms of the three similarities",
    )
    _add_output_args(p, formats=False)

    p = sub.add_parser("synth", help="write a seeded synthetic search log")
    p.add_argument("--seed", type=int, default=42)
    d = SynthConfig()
    p.add_argument("--physicians", type=int, default=d.n_physicians)
    p.add_argument("--patients", type=int, default=d.n_patients)
    p.add_argument("--terms", type=int, default=d.n_terms)
    p.add_argument("--sequences", type=int, default=d.n_sequences)
    p.add_argument("--length-p", type=float, default=d.seq_len_geometric_p,
                   help="geometric parameter of sequence length (mean 1/p)")
    p.add_argument("--dominant-prob", type=float, default=d.dominant_transition_prob,
                   help="probability of following the planted successor term")
    p.add_argument("--time-span", type=int, default=d.time_span, help="seconds")
    p.add_argument("--start", type=parse_cutoff, default=d.start_time,
                   help="start of the time span (epoch seconds or ISO date)")
    p.add_argument("--max-gap", type=int, default=d.max_gap,
                   help="maximum seconds between consecutive searches in a visit")
    p.add_argument("--header", action="store_true", help="write a column header line")
    _add_output_args(p, formats=False)

    p = sub.add_parser("recommend", help="top-N next terms for one query")
    _add_log_args(p)
    _add_method_args(p, normalize=True)
    p.add_argument("--physician", required=True)
    p.add_argument("--patient", required=True)
    p.add_argument("--last-term", required=True)
    p.add_argument("--topn", type=int, default=5)
    p.add_argument("--cutoff", type=parse_cutoff, help="train only on searches before this time")
    _add_output_args(p, formats=False)

    p = sub.add_parser("evaluate", help="HR@N of one configuration under a cut-off split")
    _add_log_args(p)
    _add_method_args(p)
    p.add_argument("--cutoff", type=parse_cutoff, required=True,
                   help="epoch seconds or ISO-8601 date (00:00 UTC)")
    p.add_argument("--ns", type=_int_list, default=DEFAULT_NS, help="e.g. 1,2,3,4,5")
    _add_output_args(p)

    p = sub.add_parser("sweep", help="HR@N over a grid of configurations")
    _add_log_args(p)
    p.add_argument("--cutoff", type=parse_cutoff, required=True,
                   help="epoch seconds or ISO-8601 date (00:00 UTC)")
    g = SweepGrid()
    p.add_argument("--methods", type=_str_list, default=g.methods)
    p.add_argument("--sims", type=_str_list, default=g.sim_orders)
    p.add_argument("--alphas", type=_float_list, default=g.alphas)
    p.add_argument("--kps", type=_int_list, default=g.k_ps)
    p.add_argument("--kys", type=_int_list, default=g.k_ys)
    p.add_argument("--betas", type=_float_list, default=g.betas)
    p.add_argument("--ns", type=_int_list, default=DEFAULT_NS)
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    _add_output_args(p)

    return parser


def _method_config(args) -> MethodConfig:
    try:
        return MethodConfig(
            args.method, sim_order=args.sim, alpha=args.alpha, k_p=args.kp, k_y=args.ky, beta=args.beta
        )
    except ValueError as e:
        raise UsageError(str(e)) from None


def _check_ns(ns):
    if not ns or min(ns) < 1:
        raise UsageError("--ns needs at least one positive integer")


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        out.write_text(text, encoding="utf-8")


def _load(args):
    events = parse_log(args.log, has_header=args.has_header, lowercase_terms=args.lowercase)
    return build_sequences(events)


def _cmd_stats(args):
    seqs = _load(args)
    doc = corpus_stats(seqs).to_dict()
    if args.similarity:
        doc["similarity"] = similarity_distribution(build_profiles(seqs))
    _emit(json.dumps(doc, indent=2) + "\n", args.out)


def _cmd_synth(args):
    config = SynthConfig(
        n_physicians=args.physicians,
        n_patients=args.patients,
        n_terms=args.terms,
        n_sequences=args.sequences,
        seq_len_geometric_p=args.length_p,
        dominant_transition_prob=args.dominant_prob,
        time_span=args.time_span,
        start_time=args.start,
        max_gap=args.max_gap,
    )
    try:
        config.validate()
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(format_log(synth_generate(config, args.seed), header=args.header), args.out)


def _cmd_recommend(args):
    config = _method_config(args)
    if args.topn < 1:
        raise UsageError("--topn must be >= 1")
    seqs = _load(args)
    if args.cutoff is not None:
        seqs, _ = cutoff_split(seqs, args.cutoff)
    models = build_models(seqs)
    if config.method == "foMC" or config.is_hybrid:
        if score_fomc(models.transitions, args.last_term).cold_start:
            _log.warning("cold start: %r has no outgoing transitions in training", args.last_term)
    rec = recommend(
        models, config, args.physician, args.patient, args.last_term, args.topn,
        normalize=args.normalize,
    )
    query = {
        "physician": args.physician,
        "patient": args.patient,
        "last_term": args.last_term,
        "config": config.to_dict(),
    }
    _emit(json.dumps(rec.to_dict(query), indent=2) + "\n", args.out)


def _cmd_evaluate(args):
    config = _method_config(args)
    _check_ns(args.ns)
    train, tests = cutoff_split(_load(args), args.cutoff)
    report = evaluate(config, train, tests, args.ns, cutoff=args.cutoff)
    text = reports_to_tsv([report]) if args.format == "tsv" else reports_to_json([report])
    _emit(text, args.out)


def _cmd_sweep(args):
    _check_ns(args.ns)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    grid = SweepGrid(args.methods, args.sims, args.alphas, args.kps, args.kys, args.betas)
    try:
        grid.configs()
    except ValueError as e:
        raise UsageError(str(e)) from None
    train, tests = cutoff_split(_load(args), args.cutoff)
    reports = sweep(grid, train, tests, args.ns, jobs=args.jobs, cutoff=args.cutoff)
    best = best_per_method(reports)
    for n, i in sorted(best["overall"].items()):
        c = reports[i].config
        _log.info("best HR@%d = %.3f: %s", n, reports[i].hr[n], c.to_dict())
    if args.format == "tsv":
        text = reports_to_tsv(reports)
    else:
        text = reports_to_json(reports, best=True)
    _emit(text, args.out)


COMMANDS = {
    "stats": _cmd_stats,
    "synth": _cmd_synth,
    "recommend": _cmd_recommend,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
}


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time (pipes, test capture)."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def _setup_logging():
    name = os.environ.get("SEQREC_LOG_LEVEL", "warn").lower()
    level = LOG_LEVELS.get(name, logging.WARNING)
    root = logging.getLogger("seqrec")
    root.setLevel(level)
    if not any(isinstance(h, _StderrHandler) for h in root.handlers):
        handler = _StderrHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    _setup_logging()

    try:
        COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"seqrec {args.command}: error: {e}", file=sys.stderr)
        return 1
    except (LogFormatError, TrainingLeakError, OSError, ValueError) as e:
        print(f"seqrec {args.command}: {e}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
