from pathlib import Path

import pytest
from hypothesis import settings

ROOT = Path(__file__).resolve().parent.parent

# derandomized so that repeated runs see the same examples
settings.register_profile("lawstar", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("lawstar")


@pytest.fixture
def repo_root() -> Path:
    return ROOT


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
