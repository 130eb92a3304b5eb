import sys

import pytest

from prufer_lab.torus import default_potential


@pytest.fixture
def cos_spec():
    return default_potential(0.3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
