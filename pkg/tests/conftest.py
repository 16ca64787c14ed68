# tests/conftest.py
import numpy as np
import pytest

from qikit.pauli_algebra import vectorize
from qikit.serialization import FIXTURES_DIR


def random_isometry(rng, rows, cols):
    g = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(rng, d, count):
    """A complete Kraus set: blocks of a random isometry C^d -> C^(count*d)."""
    v = random_isometry(rng, count * d, d)
    return [v[k * d : (k + 1) * d] for k in range(count)]


def random_instrument_kraus(rng, d, outcomes=2, per_outcome=2):
    ops = random_kraus(rng, d, outcomes * per_outcome)
    return {
        str(i): ops[i * per_outcome : (i + 1) * per_outcome] for i in range(outcomes)
    }


def random_density(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def random_state(rng):
    def make(n=1):
        return vectorize(random_density(rng, 2**n))

    return make


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR
