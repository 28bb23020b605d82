import re
from importlib import resources
from pathlib import Path

import pytest

from hybrid_keynet.topology import parse_topology

FIXTURES = Path(str(resources.files("hybrid_keynet") / "fixtures"))
GOLDEN = Path(__file__).parent / "golden"

_criteria: dict[int, list] = {}


def fixture_path(kind: str, name: str) -> Path:
    return FIXTURES / kind / name


def load_topology(name: str):
    return parse_topology(fixture_path("topologies", name).read_text())


@pytest.fixture
def topo():
    return load_topology


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        _criteria.setdefault(n, []).append((report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        results = _criteria[n]
        ok = all(outcome == "passed" for outcome, _ in results)
        secs = sum(d for _, d in results)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({secs:.2f} s)")
