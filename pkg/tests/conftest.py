import itertools
import math

import numpy as np
import pytest

from heraldsim.fock import ChannelRegistry, FockState


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def permanent(m: np.ndarray) -> complex:
    n = m.shape[0]
    if n == 0:
        return 1.0
    return sum(math.prod(m[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def fock_transition(u: np.ndarray, n_in: tuple[int, ...], n_out: tuple[int, ...]) -> complex:
    """<n_out| U |n_in> from the permanent of the repeated-index submatrix."""
    if sum(n_in) != sum(n_out):
        return 0.0
    rows = [j for j, m in enumerate(n_out) for _ in range(m)]
    cols = [i for i, n in enumerate(n_in) for _ in range(n)]
    sub = u[np.ix_(rows, cols)]
    norm = math.prod(math.factorial(x) for x in n_in) * math.prod(math.factorial(x) for x in n_out)
    return permanent(sub) / math.sqrt(norm)


def random_state(registry: ChannelRegistry, rng: np.random.Generator, terms: int = 4, max_total: int = 3) -> FockState:
    amps = {}
    n = len(registry)
    for _ in range(terms):
        occ = [0] * n
        for _ in range(int(rng.integers(0, max_total + 1))):
            occ[int(rng.integers(n))] += 1
        amps[tuple(occ)] = complex(rng.normal(), rng.normal())
    return FockState(registry, amps)


@pytest.fixture
def rng():
    return np.random.default_rng(20260415)
