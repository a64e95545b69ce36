import pytest

from gasmarket import Grid


@pytest.fixture(scope="session")
def grid60():
    return Grid(60.0, 4000)


@pytest.fixture(scope="session")
def grid_small():
    return Grid(40.0, 1001)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
