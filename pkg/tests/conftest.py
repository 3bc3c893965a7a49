import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion id -> (passed, detail), filled in by test_acceptance
ACCEPTANCE_RESULTS = {}

LTE_STATS = (21.52, 12.37, 26.31)
NR_STATS = (22.80, 8.33, 25.80)


@pytest.fixture(scope="session")
def fixture_dir():
    return Path(str(resources.files("prbshare.data.fixtures")))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE_RESULTS, key=lambda c: int(c.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[cid]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {detail}")
