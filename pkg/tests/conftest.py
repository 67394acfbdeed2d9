import numpy as np
import pytest

from parrondo_sim.market import PriceSeries, load_fixture

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def table2():
    return load_fixture("table2")


@pytest.fixture
def tiny_series():
    prices = np.array([[10.0, 5.0, 20.0],
                       [11.0, 4.0, 20.0],
                       [10.5, 4.5, 19.0],
                       [12.0, 4.4, 21.0]])
    return PriceSeries(("AAA", "BBB", "CCC"), prices)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
