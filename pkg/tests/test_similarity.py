import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqrec.core import SearchEvent, build_sequences
from seqrec.similarity import (
    SparseVector,
    build_profiles,
    cosine,
    sim_p2y,
    sim_y2p,
    similar_terms,
    similarity_distribution,
    top_similar_patients,
)

import oracles
from conftest import random_corpus


def log(*rows):
    """rows of (physician, patient, visit, terms)"""
    events = []
    ts = 0
    for y, p, v, terms in rows:
        for t in terms:
            ts += 1
            events.append(SearchEvent(y, p, v, ts, t))
    return build_sequences(events)


def test_profiles_hand_count():
    store = build_profiles(log(("Y1", "P1", "V1", "aab")))
    assert store.physician_profiles["Y1"].entries == {"a": 2, "b": 1}
    assert store.patient_profiles["P1"].entries == {"a": 2, "b": 1}
    assert store.term_profiles["a"].entries == {"P1": 2}


def test_physician_profile_aggregates_patients():
    store = build_profiles(log(("Y", "P1", "V1", "a"), ("Y", "P2", "V2", "a")))
    assert store.physician_profiles["Y"]["a"] == 2


def test_empty_profiles():
    store = build_profiles(log())
    assert not store.physician_profiles and not store.patient_profiles and not store.term_profiles


def test_cosine_examples():
    x = SparseVector({"a": 1, "b": 1})
    assert cosine(x, x) == 1.0
    assert cosine(x, SparseVector({"c": 3})) == 0.0
    assert cosine(x, SparseVector({"a": 1, "c": 1})) == pytest.approx(0.5, abs=1e-12)
    assert cosine(x, SparseVector({})) == 0.0


def test_sparse_vector_rejects_zero():
    with pytest.raises(ValueError):
        SparseVector({"a": 0})


@settings(max_examples=200, deadline=None)
@given(
    a=st.dictionaries(st.sampled_from("abcdefg"), st.integers(1, 50), max_size=7),
    b=st.dictionaries(st.sampled_from("abcdefg"), st.integers(1, 50), max_size=7),
    scale=st.integers(1, 1000),
)
def test_cosine_laws(a, b, scale):
    x, y = SparseVector(a), SparseVector(b)
    c = cosine(x, y)
    assert 0.0 <= c <= 1.0
    assert abs(c - cosine(y, x)) <= 1e-12
    if a:
        assert cosine(x, x) == 1.0
    scaled = SparseVector({k: v * scale for k, v in a.items()})
    assert abs(cosine(scaled, y) - c) <= 1e-9
    assert abs(x.norm**2 - sum(v * v for v in a.values())) <= 1e-9


# A corpus where P1's nearest neighbour is P2 (shares a and b), then P3 (shares only a)
NEIGHBOR_LOG = log(
    ("Y1", "P1", "V1", "ab"),
    ("Y2", "P1", "V2", "a"),
    ("Y2", "P2", "V3", "ab"),
    ("Y3", "P2", "V4", "c"),
    ("Y4", "P3", "V5", "ad"),
)


def test_p2y_top_patient_by_hand():
    store = build_profiles(NEIGHBOR_LOG)
    # u_P1 = {a:2, b:1}; u_P2 = {a:1, b:1, c:1}; u_P3 = {a:1, d:1}
    sim2 = 3 / (math.sqrt(5) * math.sqrt(3))
    sim3 = 2 / (math.sqrt(5) * math.sqrt(2))
    assert sim2 > sim3
    n = sim_p2y(store, "Y1", "P1", k_p=1, k_y=5)
    assert [q for q, _ in n.similar_patients] == ["P2"]
    assert n.similar_patients[0][1] == pytest.approx(sim2, abs=1e-12)


def test_p2y_candidate_physicians_need_same_term_on_both():
    store = build_profiles(NEIGHBOR_LOG)
    n = sim_p2y(store, "Y1", "P1", k_p=1, k_y=5)
    # Y2 searched a on P1 and on P2; Y3 searched only on P2 and never on P1
    assert [z for z, _ in n.similar_physicians] == ["Y2"]
    assert n.order == "P2Y"


def test_p2y_no_similar_patients():
    store = build_profiles(log(("Y1", "P1", "V1", "a"), ("Y2", "P2", "V2", "b")))
    n = sim_p2y(store, "Y1", "P1", 3, 3)
    assert n.similar_patients == () and n.similar_physicians == ()


def test_y2p_mirror():
    # Y1's nearest physician is Y2 (same term mix); Y3 is less similar
    seqs = log(
        ("Y1", "P1", "V1", "aab"),
        ("Y2", "P2", "V2", "aab"),
        ("Y3", "P3", "V3", "ac"),
        ("Y2", "P4", "V4", "z"),
    )
    store = build_profiles(seqs)
    n = sim_y2p(store, "Y1", "P1", k_p=5, k_y=1)
    assert [z for z, _ in n.similar_physicians] == ["Y2"]
    # Y2 searched a on P2 (also searched on P1) but nothing shared on P4
    assert [q for q, _ in n.similar_patients] == ["P2"]
    assert n.order == "Y2P"


def test_y2p_no_similar_physician():
    store = build_profiles(log(("Y1", "P1", "V1", "a"), ("Y2", "P2", "V2", "b")))
    n = sim_y2p(store, "Y1", "P1", 2, 2)
    assert n.similar_patients == () and n.similar_physicians == ()


def test_self_excluded():
    store = build_profiles(log(("Y1", "P1", "V1", "ab"), ("Y2", "P2", "V2", "ab")))
    n = sim_y2p(store, "Y1", "P1", 5, 5)
    assert "Y1" not in dict(n.similar_physicians)
    assert "P1" not in dict(n.similar_patients)
    assert "P1" not in dict(top_similar_patients(store, "P1", 5))


def test_ties_broken_by_id():
    store = build_profiles(
        log(("Y", "P0", "V", "a"), ("Y", "P2", "V", "a"), ("Y", "P1", "V", "a"), ("Y", "P3", "V", "a"))
    )
    assert [q for q, _ in top_similar_patients(store, "P0", 2)] == ["P1", "P2"]


def test_similar_terms_threshold():
    store = build_profiles(log(("Y", "P1", "V", "ab"), ("Y", "P2", "V", "c")))
    # a and b were both searched once on P1 only: parallel one-dimensional profiles
    assert dict(similar_terms(store, "a", 0.5)) == {"a": 1.0, "b": 1.0}
    assert similar_terms(store, "z", 0.1) == ()
    assert similar_terms(store, "a", 1.0) == ()


def test_similar_terms_self_only_at_high_beta():
    store = build_profiles(log(("Y", "P1", "V", "aab"), ("Y", "P2", "V", "bc")))
    assert similar_terms(store, "a", 0.99) == (("a", 1.0),)


def _check_top_k(engine, full, k):
    """``engine`` is a valid top-k of the oracle's full ranking.

    Values must agree position by position. Ids must agree too, except that
    among candidates whose similarities tie within 1e-9 any choice is valid
    (dense and sparse cosines can differ in the last bit).
    """
    expected = full[:k]
    assert len(engine) == len(expected)
    for (e_id, e_s), (_, o_s) in zip(engine, expected):
        assert abs(e_s - o_s) <= 1e-9
        assert e_id in {q for q, s in full if abs(s - e_s) <= 1e-9}
    assert len({e for e, _ in engine}) == len(engine)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000), k_p=st.integers(1, 5), k_y=st.integers(1, 5))
def test_matches_dense_oracle(seed, k_p, k_y):
    train = random_corpus(seed, max_physicians=6, max_patients=6, max_terms=10, max_events=40)
    store = build_profiles(train)
    dense = oracles.Dense(train)
    for a in dense.patients:
        for b in dense.patients:
            assert abs(store.patient_similarity(a, b) - dense.patient_sim(a, b)) <= 1e-9
    for a in dense.physicians:
        for b in dense.physicians:
            assert abs(store.physician_similarity(a, b) - dense.physician_sim(a, b)) <= 1e-9
    for t in dense.terms:
        sims = store.term_similarities(t)
        for u in dense.terms:
            assert abs(sims.get(u, 0.0) - dense.term_sim(t, u)) <= 1e-9

    for y in dense.physicians:
        for p in dense.patients:
            n = sim_p2y(store, y, p, k_p, k_y)
            _check_top_k(n.similar_patients, oracles.patients_ranked(dense, p), k_p)
            if n.similar_patients:
                chosen = [q for q, _ in n.similar_patients]
                full = oracles.p2y_physician_candidates(train, dense, y, p, chosen)
                _check_top_k(n.similar_physicians, full, k_y)
            else:
                assert n.similar_physicians == ()

            n = sim_y2p(store, y, p, k_p, k_y)
            _check_top_k(n.similar_physicians, oracles.physicians_ranked(dense, y), k_y)
            if n.similar_physicians:
                chosen = [z for z, _ in n.similar_physicians]
                full = oracles.y2p_patient_candidates(train, dense, p, chosen)
                _check_top_k(n.similar_patients, full, k_p)
            else:
                assert n.similar_patients == ()


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_term_profiles_transpose_patient_profiles(seed):
    store = build_profiles(random_corpus(seed))
    fwd = {(p, t): f for p, u in store.patient_profiles.items() for t, f in u.entries.items()}
    back = {(p, t): f for t, w in store.term_profiles.items() for p, f in w.entries.items()}
    assert fwd == back


def test_neighbor_lists_sorted_and_bounded():
    train = random_corpus(99, max_events=60)
    store = build_profiles(train)
    for y in sorted(train.physicians):
        for p in sorted(train.patients):
            for fn in (sim_p2y, sim_y2p):
                n = fn(store, y, p, 2, 3)
                assert len(n.similar_patients) <= 2 and len(n.similar_physicians) <= 3
                for lst in (n.similar_patients, n.similar_physicians):
                    assert all(s > 0 for _, s in lst)
                    assert list(lst) == sorted(lst, key=lambda es: (-es[1], es[0]))


def test_similarity_distribution_json():
    store = build_profiles(log(("Y1", "P1", "V", "ab"), ("Y2", "P2", "V", "bc"), ("Y3", "P3", "V", "d")))
    d = similarity_distribution(store)
    json.dumps(d)
    # patients: P1-P2 share b; P3 shares nothing -> 1 of 3 pairs
    assert d["patient"]["nonzero_fraction"] == pytest.approx(1 / 3)
    assert sum(d["patient"]["histogram"]) == 1
    assert len(d["term"]["histogram"]) == 10
