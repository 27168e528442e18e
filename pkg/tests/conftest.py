import numpy as np
import pytest

from qdistill.states import GENERAL, LocalOp, ket_to_density


def random_density(rng) -> np.ndarray:
    """Full-rank random state: normalized G G^dag, G complex Gaussian."""
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim: int = 2) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_filter(rng) -> LocalOp:
    """Random physical filter: Gaussian 2x2 scaled to largest singular value 1."""
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return LocalOp(g / np.linalg.svd(g, compute_uv=False)[0], GENERAL)


def bell_state(which: str) -> np.ndarray:
    kets = {
        "phi+": np.array([1, 0, 0, 1]) / np.sqrt(2),
        "phi-": np.array([1, 0, 0, -1]) / np.sqrt(2),
        "psi+": np.array([0, 1, 1, 0]) / np.sqrt(2),
        "psi-": np.array([0, 1, -1, 0]) / np.sqrt(2),
    }
    return ket_to_density(kets[which].astype(complex))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
