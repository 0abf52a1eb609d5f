"""Frequency profiles and cosine similarities between physicians, patients and terms.

Physicians and patients are profiled by how often each term was searched
(for a patient: by any physician); a term is profiled by how often it was
searched on each patient. Similarities against a target are computed on
demand through inverted indexes, since profiles are very sparse.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Mapping

from .core.types import SequenceSet

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SparseVector:
    entries: dict[Hashable, float]
    sq_norm: float = field(init=False)

    def __post_init__(self):
        if any(v <= 0 for v in self.entries.values()):
            raise ValueError("sparse vector entries must be positive")
        object.__setattr__(self, "sq_norm", math.fsum(v * v for v in self.entries.values()))

    @property
    def norm(self) -> float:
        return math.sqrt(self.sq_norm)

    def __getitem__(self, key) -> float:
        return self.entries.get(key, 0)

    def __len__(self):
        return len(self.entries)

    def dot(self, other: SparseVector) -> float:
        a, b = (self, other) if len(self) <= len(other) else (other, self)
        return math.fsum(v * b.entries[k] for k, v in a.entries.items() if k in b.entries)


EMPTY = SparseVector({})


def cosine(x: SparseVector, y: SparseVector) -> float:
    if x.sq_norm == 0 or y.sq_norm == 0:
        return 0.0
    # sqrt of the product keeps cosine(x, x) exactly 1; clamp guards parallel vectors
    return min(1.0, x.dot(y) / math.sqrt(x.sq_norm * y.sq_norm))


@dataclass(frozen=True)
class NeighborSets:
    similar_patients: tuple[tuple[str, float], ...]
    similar_physicians: tuple[tuple[str, float], ...]
    order: str


def _top_k(sims: Mapping[str, float], k: int) -> tuple[tuple[str, float], ...]:
    ranked = sorted(((e, s) for e, s in sims.items() if s > 0), key=lambda es: (-es[1], es[0]))
    return tuple(ranked[:k])


class ProfileStore:
    """Sparse profiles plus the inverted indexes needed for neighbor lookup.

    Immutable after construction apart from per-target similarity caches,
    which only ever memoize deterministic values.
    """

    def __init__(
        self,
        physician_profiles: dict[str, SparseVector],
        patient_profiles: dict[str, SparseVector],
        term_profiles: dict[str, SparseVector],
        pair_terms: dict[tuple[str, str], frozenset[str]],
        watermark: int = -1,
    ):
        self.physician_profiles = physician_profiles
        self.patient_profiles = patient_profiles
        self.term_profiles = term_profiles
        self.pair_terms = pair_terms
        self.watermark = watermark

        term_physicians: dict[str, set[str]] = defaultdict(set)
        for y, v in physician_profiles.items():
            for t in v.entries:
                term_physicians[t].add(y)
        self.term_physicians = {t: frozenset(ys) for t, ys in term_physicians.items()}

        physician_patients: dict[str, set[str]] = defaultdict(set)
        patient_term_physicians: dict[tuple[str, str], set[str]] = defaultdict(set)
        for (y, p), terms in pair_terms.items():
            physician_patients[y].add(p)
            for t in terms:
                patient_term_physicians[(p, t)].add(y)
        self.physician_patients = {y: frozenset(ps) for y, ps in physician_patients.items()}
        self.patient_term_physicians = {k: frozenset(v) for k, v in patient_term_physicians.items()}

        self.term_totals: dict[str, int] = {
            t: int(sum(w.entries.values())) for t, w in term_profiles.items()
        }
        self._cache: dict[tuple[str, str], dict[str, float]] = {}

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = {}
        return state

    # pairwise similarities against one target

    def patient_similarities(self, p: str) -> dict[str, float]:
        """sim_p(p, p') for every other patient sharing at least one term with p."""
        key = ("p", p)
        if key not in self._cache:
            u = self.patient_profiles.get(p, EMPTY)
            cands = {q for t in u.entries for q in self.term_profiles[t].entries}
            cands.discard(p)
            self._cache[key] = {q: cosine(u, self.patient_profiles[q]) for q in sorted(cands)}
        return self._cache[key]

    def physician_similarities(self, y: str) -> dict[str, float]:
        key = ("y", y)
        if key not in self._cache:
            v = self.physician_profiles.get(y, EMPTY)
            cands = {z for t in v.entries for z in self.term_physicians[t]}
            cands.discard(y)
            self._cache[key] = {z: cosine(v, self.physician_profiles[z]) for z in sorted(cands)}
        return self._cache[key]

    def term_similarities(self, t: str) -> dict[str, float]:
        """sim_t(t, t') for every term sharing a patient with t, t itself included."""
        key = ("t", t)
        if key not in self._cache:
            w = self.term_profiles.get(t, EMPTY)
            cands = {s for p in w.entries for s in self.patient_profiles[p].entries}
            self._cache[key] = {s: cosine(w, self.term_profiles[s]) for s in sorted(cands)}
        return self._cache[key]

    def physician_similarity(self, y: str, z: str) -> float:
        return cosine(self.physician_profiles.get(y, EMPTY), self.physician_profiles.get(z, EMPTY))

    def patient_similarity(self, p: str, q: str) -> float:
        return cosine(self.patient_profiles.get(p, EMPTY), self.patient_profiles.get(q, EMPTY))


def build_profiles(train: SequenceSet) -> ProfileStore:
    phys: dict[str, dict[str, int]] = defaultdict(dict)
    pats: dict[str, dict[str, int]] = defaultdict(dict)
    terms: dict[str, dict[str, int]] = defaultdict(dict)
    pairs: dict[tuple[str, str], set[str]] = defaultdict(set)
    for seq in train:
        y, p = seq.physician_id, seq.patient_id
        for t in seq.term_list:
            phys[y][t] = phys[y].get(t, 0) + 1
            pats[p][t] = pats[p].get(t, 0) + 1
            terms[t][p] = terms[t].get(p, 0) + 1
            pairs[(y, p)].add(t)
    store = ProfileStore(
        {y: SparseVector(v) for y, v in phys.items()},
        {p: SparseVector(u) for p, u in pats.items()},
        {t: SparseVector(w) for t, w in terms.items()},
        {k: frozenset(v) for k, v in pairs.items()},
        train.max_timestamp,
    )
    _log.debug(
        "profiles: %d physicians, %d patients, %d terms",
        len(phys),
        len(pats),
        len(terms),
    )
    return store


def top_similar_patients(store: ProfileStore, p: str, k_p: int) -> tuple[tuple[str, float], ...]:
    """Plain top-k_p patients by positive similarity to p, p excluded."""
    if k_p < 1:
        raise ValueError("k_p must be >= 1")
    return _top_k(store.patient_similarities(p), k_p)


def top_similar_physicians(store: ProfileStore, y: str, k_y: int) -> tuple[tuple[str, float], ...]:
    if k_y < 1:
        raise ValueError("k_y must be >= 1")
    return _top_k(store.physician_similarities(y), k_y)


def sim_p2y(store: ProfileStore, y: str, p: str, k_p: int, k_y: int) -> NeighborSets:
    """Patient-first neighbor identification.

    Similar physicians are drawn only from those who searched some term on
    ``p`` and the same term on at least one of the similar patients.
    """
    if k_y < 1:
        raise ValueError("k_y must be >= 1")
    patients = top_similar_patients(store, p, k_p)
    if not patients:
        return NeighborSets((), (), "P2Y")

    neighbor_ids = [q for q, _ in patients]
    candidates: set[str] = set()
    for t in store.patient_profiles[p].entries:
        on_target = store.patient_term_physicians.get((p, t), frozenset())
        if not on_target:
            continue
        on_neighbors: set[str] = set()
        for q in neighbor_ids:
            on_neighbors.update(store.patient_term_physicians.get((q, t), ()))
        candidates.update(on_target & on_neighbors)
    candidates.discard(y)

    sims = store.physician_similarities(y)
    physicians = _top_k({z: sims.get(z, 0.0) for z in candidates}, k_y)
    return NeighborSets(patients, physicians, "P2Y")


def sim_y2p(store: ProfileStore, y: str, p: str, k_p: int, k_y: int) -> NeighborSets:
    """Physician-first neighbor identification.

    Similar patients are drawn only from those on whom a similar physician
    searched a term that was also searched (by anyone) on ``p``.
    """
    if k_p < 1:
        raise ValueError("k_p must be >= 1")
    physicians = top_similar_physicians(store, y, k_y)
    if not physicians:
        return NeighborSets((), (), "Y2P")

    target_terms = store.patient_profiles.get(p, EMPTY).entries.keys()
    candidates: set[str] = set()
    for z, _ in physicians:
        for q in store.physician_patients.get(z, ()):
            if q != p and not store.pair_terms[(z, q)].isdisjoint(target_terms):
                candidates.add(q)

    sims = store.patient_similarities(p)
    patients = _top_k({q: sims.get(q, 0.0) for q in candidates}, k_p)
    return NeighborSets(patients, physicians, "Y2P")


def similar_terms(store: ProfileStore, t: str, beta: float) -> tuple[tuple[str, float], ...]:
    """Terms whose similarity to ``t`` is strictly above ``beta`` (t itself included)."""
    sims = store.term_similarities(t)
    return tuple(sorted(((s, v) for s, v in sims.items() if v > beta), key=lambda sv: (-sv[1], sv[0])))


def _histogram(values: list[float], bins: int = 10) -> list[int]:
    counts = [0] * bins
    for v in values:
        counts[min(int(v * bins), bins - 1)] += 1
    return counts


def _pairwise(profiles: Mapping[str, SparseVector], index: Mapping) -> tuple[float, list[int]]:
    ids = sorted(profiles)
    n = len(ids)
    n_pairs = n * (n - 1) // 2
    nonzero: list[float] = []
    for i, a in enumerate(ids):
        va = profiles[a]
        others = {b for d in va.entries for b in index[d] if b > a}
        nonzero.extend(cosine(va, profiles[b]) for b in sorted(others))
    nonzero = [s for s in nonzero if s > 0]
    frac = len(nonzero) / n_pairs if n_pairs else 0.0
    return frac, _histogram(nonzero)


def similarity_distribution(store: ProfileStore) -> dict:
    """Fraction of distinct entity pairs with nonzero similarity, and a 10-bin histogram
    of the nonzero values, for each of the three similarity types."""
    term_index = {t: set(w.entries) for t, w in store.term_profiles.items()}
    patient_index = {p: set(u.entries) for p, u in store.patient_profiles.items()}
    out = {}
    for name, profiles, index in (
        ("physician", store.physician_profiles, store.term_physicians),
        ("patient", store.patient_profiles, term_index),
        ("term", store.term_profiles, patient_index),
    ):
        frac, hist = _pairwise(profiles, index)
        out[name] = {"nonzero_fraction": frac, "histogram": hist}
    return out
