from __future__ import annotations

import random
from pathlib import Path

import pytest

from seqrec.core import SearchEvent, build_sequences

FIXTURES = Path(__file__).parent / "fixtures"


def random_events(
    seed: int,
    max_physicians: int = 8,
    max_patients: int = 8,
    max_terms: int = 12,
    max_events: int = 60,
) -> list[SearchEvent]:
    """A small random log; visits are shared across physicians now and then."""
    rng = random.Random(seed)
    ny = rng.randint(1, max_physicians)
    np_ = rng.randint(1, max_patients)
    nt = rng.randint(1, max_terms)
    n = rng.randint(1, max_events)
    events = []
    for _ in range(n):
        y = f"Y{rng.randrange(ny)}"
        p = f"P{rng.randrange(np_)}"
        v = f"V{rng.randrange(3)}"
        # a few terms dominate, like real search logs
        t = f"t{min(rng.randrange(nt), rng.randrange(nt))}"
        events.append(SearchEvent(y, p, v, rng.randint(1, 100), t))
    return events


def random_corpus(seed: int, **kw):
    return build_sequences(random_events(seed, **kw))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


# per-criterion pass/fail lines for the acceptance module

_criteria: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    prev = _criteria.get(label, "PASS")
    _criteria[label] = "PASS" if (report.passed and prev == "PASS") else "FAIL"


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        item.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: int(s.split()[0])):
        terminalreporter.write_line(f"[{_criteria[label]}] criterion {label}")
