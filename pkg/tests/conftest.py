import numpy as np
import pytest

import igbss
from oracles import Oracle


@pytest.fixture
def space2221():
    return igbss.build_sample_space(2, 2, 2, 1)


@pytest.fixture
def oracle2221():
    return Oracle(2, 2, 2, 1)


@pytest.fixture
def X1234():
    return np.array([[1.0, 2.0], [3.0, 4.0]])


@pytest.fixture
def emp1234(space2221, X1234):
    return igbss.empirical_distribution(space2221, X1234, "sum")


def small_space_params():
    """(L, N, M, k) tuples whose spaces have at most 40 states."""
    out = []
    for L in (2, 3):
        for N in (1, 2, 3):
            for M in (1, 2, 3):
                for k in range(1, N + 1):
                    size = 1 + igbss.poset.n_mixing_states(L, N, k) + N * M + L * M
                    if size <= 40:
                        out.append((L, N, M, k))
    return out


# acceptance report ---------------------------------------------------------

ACCEPTANCE: dict = {}
ACCEPTANCE_INFO: list = []


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE and not ACCEPTANCE_INFO:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line("criterion %2d: %s  %s" % (n, "PASS" if ok else "FAIL", detail))
    for line in ACCEPTANCE_INFO:
        terminalreporter.write_line("info: " + line)
