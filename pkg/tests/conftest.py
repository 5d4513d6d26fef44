import numpy as np
import pytest

from fmmlab import builtin

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def acc_bundle():
    return builtin("acc-4x4x4")


@pytest.fixture(scope="session")
def alt_bundle():
    return builtin("acc-4x4x4-alt")


@pytest.fixture(scope="session")
def strassen_bundle():
    return builtin("strassen")


@pytest.fixture(scope="session")
def winograd_bundle():
    return builtin("winograd")


@pytest.fixture(scope="session")
def classic_bundle():
    return builtin("classic-2x2x2")


def exact_equal(X, Y):
    X = np.asarray(X, dtype=object)
    Y = np.asarray(Y, dtype=object)
    return X.shape == Y.shape and all(
        a == b for a, b in zip(X.reshape(-1), Y.reshape(-1))
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number} [{status}] {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
