import numpy as np
import pytest

from causal_capacity.tensor_core import LabeledOperator


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def random_hermitian(rng, n):
    a = random_matrix(rng, n)
    return (a + a.conj().T) / 2


def random_state(rng, n, rank=None):
    a = random_matrix(rng, n, rank or n)
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def op(labels_dims, matrix):
    return LabeledOperator(labels_dims, matrix)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
