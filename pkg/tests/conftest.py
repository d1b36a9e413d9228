import pytest

from helpers import net_and_cycle

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def report_line():
    """Record one acceptance verdict line, echoed in the terminal summary."""
    return ACCEPTANCE_LINES.append


@pytest.fixture(scope="session")
def loops():
    return net_and_cycle("two_negative_loops")


@pytest.fixture(scope="session")
def complex3():
    return net_and_cycle("complex_graph")


@pytest.fixture(scope="session")
def multi():
    return net_and_cycle("multiple_thresholds")


@pytest.fixture(scope="session")
def loop2d():
    return net_and_cycle("negative_loop_2d")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
