import sys
from pathlib import Path

import pytest

from pbfair.election import Election

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(Path(__file__).parent))
sys.path.insert(0, str(DATA))

MINIMAL = """META
key;value
budget;100
vote_type;approval
num_projects;2
num_votes;1
PROJECTS
project_id;cost
p1;60
p2;50
VOTES
voter_id;vote
v1;p1
"""


@pytest.fixture
def minimal_text():
    return MINIMAL


@pytest.fixture
def e1():
    """Budget 300; A costs 300, B and C 150; v1, v2 approve {A, C}, v3 {A, B}."""
    return Election.build(
        300,
        {"A": 300, "C": 150, "B": 150},
        {"v1": ["A", "C"], "v2": ["A", "C"], "v3": ["A", "B"]},
    )


@pytest.fixture
def corpus_dir():
    return DATA / "corpus"


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line; fails the test when ``ok`` is false."""

    def check(name, ok, detail):
        _ACCEPTANCE.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
