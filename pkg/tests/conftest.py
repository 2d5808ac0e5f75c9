import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

from nodalcount.domain import Disk, SpectralWindow  # noqa: E402


@pytest.fixture(scope="session")
def data_dir():
    return HERE / "data"


@pytest.fixture(scope="session")
def unit_disk():
    return Disk(1.0)


def window(kind, lam):
    return SpectralWindow(kind, lam)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
