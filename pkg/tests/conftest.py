import numpy as np
import pytest

from usdiscord import DensityMatrix


def random_density(dim, rng, rank=None):
    g = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    m = g @ g.conj().T
    return m / np.trace(m)


def random_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def product_state(rng, d_sys=2, d_anc=2):
    a, b = random_density(d_sys, rng), random_density(d_anc, rng)
    return DensityMatrix(np.kron(a, b), (d_sys, d_anc)), a, b


def symmetric_condition_ensemble(rng, d, phase=0.0):
    """Priors solving p_i |a_i| sqrt(1-|a_i|^2) = const for random moduli."""
    a = rng.uniform(0.05, 0.95, d)
    p = 1.0 / (a * np.sqrt(1 - a**2))
    return p / p.sum(), a * np.exp(1j * phase)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bell():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return DensityMatrix.from_pure(psi, (2, 2))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
