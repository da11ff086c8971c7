import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import load_system  # noqa: E402


@pytest.fixture(scope="session")
def h2():
    return load_system("h2_0.735")


@pytest.fixture(scope="session")
def h4():
    return load_system("h4_0.750")


@pytest.fixture(scope="session")
def h4_stretched():
    return load_system("h4_1.500")


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
