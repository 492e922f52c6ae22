import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def brute_joint_vector(pairs, dim_a, dim_b):
    """Explicit sum of amplitude * |a>|b> over ``(amp, a, b)`` triples."""
    psi = np.zeros(dim_a * dim_b, dtype=complex)
    for amp, a, b in pairs:
        ea = np.zeros(dim_a)
        ea[a] = 1
        eb = np.zeros(dim_b)
        eb[b] = 1
        psi += amp * np.kron(ea, eb)
    return psi


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
