import pytest

from thermvs.charlib import synth_charlib


@pytest.fixture(scope="session")
def lib():
    return synth_charlib(0)


def pytest_terminal_summary(terminalreporter):
    from report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
