import numpy as np
import pytest

from tissueseg import Histogram, make_phantom


@pytest.fixture(scope="session")
def phantom():
    return make_phantom(256, 256, (20, 80, 140, 200), 12.0, seed=0)


@pytest.fixture(scope="session")
def clean_phantom():
    return make_phantom(256, 256, (20, 80, 140, 200), 0.0, seed=0)


@pytest.fixture
def small_hist():
    # p = [0.5, 0.25, 0, 0.25]
    return Histogram(np.array([2, 1, 0, 1]))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[1][2:])):
            terminalreporter.write_line(line)
