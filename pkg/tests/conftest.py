import numpy as np
import pytest

from spectravol.spectra import Spectrahedron


def random_pd(rng, n, cond=10.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.exp(rng.uniform(0.0, np.log(cond), n))
    return (Q * w) @ Q.T


def random_sym(rng, n):
    G = rng.standard_normal((n, n))
    return 0.5 * (G + G.T)


def random_instance(rng, n, m):
    """Compact instance with I/n strictly inside: a trace constraint plus m-1 random ones."""
    P0 = random_pd(rng, n)
    mats = [np.eye(n)] + [random_sym(rng, n) for _ in range(m - 1)]
    A = np.stack(mats)
    b = np.einsum("kab,ba->k", A, P0)
    return Spectrahedron(A, b, name=f"random(n={n},m={m})"), P0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
