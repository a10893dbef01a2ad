import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from semifinite.models import circle_dirac, torus_model  # noqa: E402


@pytest.fixture(scope="session")
def circle_large():
    return circle_dirac(10**6)


@pytest.fixture(scope="session")
def torus_laplacian():
    return torus_model(2, "laplacian", 2000)


@pytest.fixture(scope="session")
def torus_dirac():
    return torus_model(2, "dirac", 2000)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "REPORT", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
