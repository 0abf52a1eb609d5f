"""Cut-off evaluation: HR@N for each scoring method, and grid sweeps over its parameters."""

from __future__ import annotations

import io
import itertools
import json
import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cf import (
    PatientTransitionStore,
    TripletStore,
    build_patient_transitions,
    build_triplet_store,
    score_tptcf,
    score_ypcf,
)
from .core.types import SequenceSet, TestCase
from .hybrid import Recommendation, ScoreVector, blend, recommend_topn
from .markov import TransitionModel, build_transition_model, score_fomc
from .similarity import ProfileStore, build_profiles, sim_p2y, sim_y2p, top_similar_patients

_log = logging.getLogger(__name__)

METHODS = ("foMC", "ypCF", "TptCF", "DmCF-ypCF", "DmCF-TptCF")
SIM_ORDERS = ("P2Y", "Y2P")
DEFAULT_NS = (1, 2, 3, 4, 5)

_METHOD_LOOKUP = {m.lower(): m for m in METHODS}


def canonical_method(name: str) -> str:
    method = _METHOD_LOOKUP.get(str(name).lower())
    if method is None:
        raise ValueError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}")
    return method


class TrainingLeakError(RuntimeError):
    """A model used for evaluation contains data from at or after the cut-off."""


@dataclass(frozen=True)
class MethodConfig:
    method: str
    sim_order: str | None = None
    alpha: float | None = None
    k_p: int | None = None
    k_y: int | None = None
    beta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        if self.sim_order is not None:
            order = str(self.sim_order).upper().removeprefix("SIM")
            if order not in SIM_ORDERS:
                raise ValueError(f"unknown similarity order {self.sim_order!r}")
            object.__setattr__(self, "sim_order", order)

        self._require("sim_order", self.uses_ypcf)
        self._require("k_y", self.uses_ypcf)
        self._require("k_p", self.uses_ypcf or self.uses_tptcf)
        self._require("beta", self.uses_tptcf)
        self._require("alpha", self.is_hybrid)

        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.beta is not None and not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        for k in ("k_p", "k_y"):
            v = getattr(self, k)
            if v is not None and v < 1:
                raise ValueError(f"{k} must be >= 1, got {v}")

    def _require(self, name: str, needed: bool):
        present = getattr(self, name) is not None
        if needed and not present:
            raise ValueError(f"{self.method} requires {name}")
        if present and not needed:
            raise ValueError(f"{self.method} does not take {name}")

    @property
    def is_hybrid(self) -> bool:
        return self.method.startswith("DmCF")

    @property
    def uses_ypcf(self) -> bool:
        return self.method.endswith("ypCF")

    @property
    def uses_tptcf(self) -> bool:
        return self.method.endswith("TptCF")

    def sort_key(self):
        def opt(v):
            return (v is not None, v if v is not None else 0)

        return (
            METHODS.index(self.method),
            opt(self.sim_order),
            opt(self.alpha),
            opt(self.k_p),
            opt(self.k_y),
            opt(self.beta),
        )

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "sim_order": self.sim_order,
            "alpha": self.alpha,
            "k_p": self.k_p,
            "k_y": self.k_y,
            "beta": self.beta,
        }


@dataclass(frozen=True)
class Models:
    """Everything query scoring needs, built once from the training sequences."""

    transitions: TransitionModel
    profiles: ProfileStore
    triplets: TripletStore
    patient_transitions: PatientTransitionStore

    @property
    def term_frequencies(self) -> dict[str, int]:
        return self.profiles.term_totals

    def watermarks(self) -> dict[str, int]:
        return {
            "transitions": self.transitions.watermark,
            "profiles": self.profiles.watermark,
            "triplets": self.triplets.watermark,
            "patient_transitions": self.patient_transitions.watermark,
        }


def build_models(train: SequenceSet) -> Models:
    return Models(
        build_transition_model(train),
        build_profiles(train),
        build_triplet_store(train),
        build_patient_transitions(train),
    )


def check_isolation(models: Models, cutoff: int | None, tests: Sequence[TestCase] = ()):
    """Raise :class:`TrainingLeakError` if any model saw data at or after the cut-off.

    Without an explicit cut-off, the earliest test target time bounds it.
    """
    bound = cutoff
    if bound is None and tests:
        bound = min(tc.target_timestamp for tc in tests)
    if bound is None:
        return
    bad = {name: wm for name, wm in models.watermarks().items() if wm >= bound}
    if bad:
        raise TrainingLeakError(f"models contain events at or after {bound}: {bad}")


def score_query(
    models: Models,
    config: MethodConfig,
    y: str,
    p: str,
    last_term: str,
    *,
    normalize: bool = False,
) -> ScoreVector:
    dyn = cf = None
    if config.method == "foMC" or config.is_hybrid:
        dyn = score_fomc(models.transitions, last_term)
    if config.uses_ypcf:
        if config.sim_order == "P2Y":
            nbrs = sim_p2y(models.profiles, y, p, config.k_p, config.k_y)
        else:
            nbrs = sim_y2p(models.profiles, y, p, config.k_p, config.k_y)
        cf = score_ypcf(models.triplets, nbrs, y, p)
    elif config.uses_tptcf:
        patients = top_similar_patients(models.profiles, p, config.k_p)
        cf = score_tptcf(
            models.patient_transitions, models.profiles, p, last_term, patients, config.beta
        )

    if config.is_hybrid:
        return blend(config.alpha, dyn, cf, normalize=normalize)
    return dyn if dyn is not None else cf


def recommend(
    models: Models, config: MethodConfig, y: str, p: str, last_term: str, n: int, **kw
) -> Recommendation:
    scores = score_query(models, config, y, p, last_term, **kw)
    return recommend_topn(scores, n, models.term_frequencies)


def hit_rate_at_n(results: Sequence[tuple[Recommendation, str]], n: int) -> float:
    """Fraction of cases whose target is among the first ``n`` recommended terms."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not results:
        raise ValueError("no test cases")
    hits = sum(1 for rec, target in results if target in rec.terms[:n])
    return hits / len(results)


@dataclass(frozen=True)
class MetricsReport:
    config: MethodConfig
    cutoff: int | None
    n_test_cases: int
    hr: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cutoff": self.cutoff,
            "n_test_cases": self.n_test_cases,
            "hr": {str(n): v for n, v in sorted(self.hr.items())},
        }


def _evaluate(
    config: MethodConfig,
    models: Models,
    tests: Sequence[TestCase],
    ns: Sequence[int],
    cutoff: int | None,
) -> MetricsReport:
    if not tests:
        raise ValueError("no test cases")
    depth = max(ns)
    results = [
        (recommend(models, config, tc.physician_id, tc.patient_id, tc.last_term, depth), tc.target)
        for tc in tests
    ]
    hr = {n: hit_rate_at_n(results, n) for n in sorted(ns)}
    return MetricsReport(config, cutoff, len(tests), hr)


def evaluate(
    config: MethodConfig,
    train: SequenceSet,
    tests: Sequence[TestCase],
    ns: Iterable[int] = DEFAULT_NS,
    *,
    cutoff: int | None = None,
    models: Models | None = None,
) -> MetricsReport:
    """HR@N of one method configuration over the held-out test cases.

    Each query uses only the last pre-cutoff term of its sequence. Targets
    unseen in training still count (as misses).
    """
    ns = tuple(sorted(set(ns)))
    if not ns or ns[0] < 1:
        raise ValueError("Ns must be a non-empty set of positive integers")
    if models is None:
        models = build_models(train)
    check_isolation(models, cutoff, tests)
    return _evaluate(config, models, tests, ns, cutoff)


@dataclass(frozen=True)
class SweepGrid:
    methods: tuple[str, ...] = METHODS
    sim_orders: tuple[str, ...] = SIM_ORDERS
    alphas: tuple[float, ...] = (0.1, 0.2, 0.5)
    k_ps: tuple[int, ...] = (1, 10, 100)
    k_ys: tuple[int, ...] = (1, 2, 5)
    betas: tuple[float, ...] = (0.1, 0.5, 0.9)

    def configs(self) -> list[MethodConfig]:
        """Every valid configuration in the Cartesian product, sorted and de-duplicated."""
        if not self.methods:
            raise ValueError("grid has no methods")
        out: set[MethodConfig] = set()
        for name in self.methods:
            method = canonical_method(name)
            hybrid = method.startswith("DmCF")
            yp = method.endswith("ypCF")
            tpt = method.endswith("TptCF")
            axes = [
                self.sim_orders if yp else (None,),
                self.alphas if hybrid else (None,),
                self.k_ps if (yp or tpt) else (None,),
                self.k_ys if yp else (None,),
                self.betas if tpt else (None,),
            ]
            if any(not a for a in axes):
                raise ValueError(f"grid leaves no valid configuration for {method}")
            for sim, alpha, kp, ky, beta in itertools.product(*axes):
                out.add(MethodConfig(method, sim, alpha, kp, ky, beta))
        return sorted(out, key=MethodConfig.sort_key)


_worker_state: tuple | None = None


def _worker_init(models, tests, ns, cutoff):
    global _worker_state
    _worker_state = (models, tests, ns, cutoff)


def _worker_eval(config: MethodConfig) -> MetricsReport:
    models, tests, ns, cutoff = _worker_state
    return _evaluate(config, models, tests, ns, cutoff)


def sweep(
    grid: SweepGrid,
    train: SequenceSet,
    tests: Sequence[TestCase],
    ns: Iterable[int] = DEFAULT_NS,
    *,
    jobs: int = 1,
    cutoff: int | None = None,
    models: Models | None = None,
) -> list[MetricsReport]:
    """Evaluate every configuration of ``grid`` against shared models.

    Reports come back in configuration order regardless of ``jobs``.
    """
    configs = grid.configs()
    ns = tuple(sorted(set(ns)))
    if not ns or ns[0] < 1:
        raise ValueError("Ns must be a non-empty set of positive integers")
    if not tests:
        raise ValueError("no test cases")
    if models is None:
        models = build_models(train)
    check_isolation(models, cutoff, tests)
    _log.info("sweeping %d configurations over %d test cases", len(configs), len(tests))

    if jobs <= 1 or len(configs) == 1:
        return [_evaluate(c, models, tests, ns, cutoff) for c in configs]

    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(
        max_workers=min(jobs, len(configs)),
        mp_context=ctx,
        initializer=_worker_init,
        initargs=(models, list(tests), ns, cutoff),
    ) as pool:
        chunk = max(1, len(configs) // (4 * jobs))
        return list(pool.map(_worker_eval, configs, chunksize=chunk))


def best_per_method(reports: Sequence[MetricsReport]) -> dict:
    """Indexes of the best report per (method, N) and overall per N; first wins ties."""
    per_method: dict[str, dict[int, int]] = {}
    overall: dict[int, int] = {}
    for i, r in enumerate(reports):
        best = per_method.setdefault(r.config.method, {})
        for n, v in r.hr.items():
            if n not in best or v > reports[best[n]].hr[n]:
                best[n] = i
            if n not in overall or v > reports[overall[n]].hr[n]:
                overall[n] = i
    return {"per_method": per_method, "overall": overall}


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def reports_to_tsv(reports: Sequence[MetricsReport]) -> str:
    ns = sorted({n for r in reports for n in r.hr})
    out = io.StringIO()
    out.write("\t".join(["method", "sim", "alpha", "kp", "ky", "beta"] + [f"HR@{n}" for n in ns]))
    out.write("\n")
    for r in reports:
        c = r.config
        cells = [
            c.method,
            f"sim{c.sim_order}" if c.sim_order else "-",
            _fmt(c.alpha),
            _fmt(c.k_p),
            _fmt(c.k_y),
            _fmt(c.beta),
        ]
        cells += [f"{r.hr[n]:.3f}" if n in r.hr else "-" for n in ns]
        out.write("\t".join(cells) + "\n")
    return out.getvalue()


def reports_to_json(reports: Sequence[MetricsReport], *, best: bool = False) -> str:
    doc: dict = {"reports": [r.to_dict() for r in reports]}
    if best:
        summary = best_per_method(reports)
        doc["best"] = {
            "per_method": {
                m: {str(n): i for n, i in sorted(d.items())} for m, d in summary["per_method"].items()
            },
            "overall": {str(n): i for n, i in sorted(summary["overall"].items())},
        }
    return json.dumps(doc, indent=2) + "\n"


def report_from_dict(d: dict) -> MetricsReport:
    return MetricsReport(
        MethodConfig(**d["config"]),
        d["cutoff"],
        d["n_test_cases"],
        {int(n): v for n, v in d["hr"].items()},
    )
