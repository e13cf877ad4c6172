import pytest

from avoidlab.grid import GridProblem
from avoidlab.qbaseline import fig2b_task
from avoidlab.worked import example1_task, fig5_task


@pytest.fixture
def example1():
    return example1_task()


@pytest.fixture
def fig2b():
    return fig2b_task()


@pytest.fixture
def fig5():
    return fig5_task()


@pytest.fixture
def small_grid():
    return GridProblem.make(2, 2, [(0, 0), (2, 1)], [(2, 2), (1, 0)], 5)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
