import numpy as np
import pytest

from deficiency.operator import hermitian_model, laplacian_interval, momentum_interval


def random_hermitian(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


@pytest.fixture(scope="session")
def momentum():
    return momentum_interval(200)


@pytest.fixture(scope="session")
def laplacian():
    return laplacian_interval(200)


@pytest.fixture(scope="session")
def small_momentum():
    return momentum_interval(24)


@pytest.fixture(scope="session")
def herm6():
    return hermitian_model(random_hermitian(6, 3))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
