import json
from pathlib import Path

import pytest

from gtcentrality import fixtures
from gtcentrality.network import members

GOLDEN = Path(__file__).parent / "golden"


def raw(net):
    """(weights, edges) in the oracle's plain form."""
    return list(net.weights), dict(net.edges)


def unions_of(partition):
    return [members(u) for u in partition.unions]


@pytest.fixture
def tri():
    return fixtures.tri()


@pytest.fixture
def tri_golden():
    return json.loads((GOLDEN / "tri_exact.json").read_text())


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
