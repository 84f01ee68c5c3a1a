import sys

import numpy as np
import pytest

from spectral_bounds import Pencil, lanczos


def krylov_basis(K, q1, m):
    return lanczos(K, q1, m).Q_ell


def random_spd(rng, n, low=1.0, high=20.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Q * rng.uniform(low, high, n)) @ Q.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def diag_problem():
    """diag(1, 3, ..., 99), identity mass, all-ones start vector."""
    K = np.diag(np.arange(1.0, 100.0, 2.0))
    return Pencil(K), np.ones(50)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "LINES", None)
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
