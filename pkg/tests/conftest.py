import numpy as np
import pytest

from ctlp.bundled import example1, reference
from ctlp.instance import CTLPInstance
from ctlp.timefunc import Breakpoints, PiecewiseFn, TimeGrid


@pytest.fixture(scope="session")
def ex1():
    return example1()


@pytest.fixture(scope="session")
def ex1_grid(ex1):
    return TimeGrid.from_times(ex1.breakpoints, [0.5, 1.5, 1.95])


@pytest.fixture(scope="session")
def ex1_ref(ex1_grid):
    return reference(ex1_grid)


def constant_instance(A, b, c, T=1.0) -> CTLPInstance:
    """Time-invariant instance on ``[0, T]`` with one piece."""
    bp = Breakpoints([0.0, T])
    k = lambda v: PiecewiseFn(bp, [[float(v)]])  # noqa: E731
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return CTLPInstance([[k(v) for v in row] for row in A], [k(v) for v in b], [k(v) for v in c])


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def verdict(request):
    """``verdict(n, ok, detail)`` records one criterion line, printed at the end of the run."""

    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        request.config.stash[ACCEPTANCE_LINES].append((n, line))
        print(line)
        return ok

    return record
