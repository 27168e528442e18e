"""Two-qubit state representation and elementary operations.

Basis order is fixed throughout the package as |HH>, |HV>, |VH>, |VV>,
with H mapped to the computational 0 and V to 1.  A density matrix is a
plain 4x4 complex ndarray that has passed :func:`validate_density`.
All functions here are pure; nothing mutates its inputs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadTraceError,
    NotHermitianError,
    NotPSDError,
    ZeroProbabilityError,
)

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: The Pauli basis sigma_0..sigma_3 as a (4, 2, 2) array.
PAULIS = np.stack([SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z])

#: PAULI_PRODUCTS[i, j] = sigma_i (x) sigma_j, shape (4, 4, 4, 4).
PAULI_PRODUCTS = np.array(
    [[np.kron(PAULIS[i], PAULIS[j]) for j in range(4)] for i in range(4)]
)

KET_HH = np.array([1, 0, 0, 0], dtype=complex)
KET_HV = np.array([0, 1, 0, 0], dtype=complex)
KET_VH = np.array([0, 0, 1, 0], dtype=complex)
KET_VV = np.array([0, 0, 0, 1], dtype=complex)


def ket_to_density(ket: np.ndarray) -> np.ndarray:
    """Projector |ket><ket| of a normalized state vector."""
    ket = np.asarray(ket, dtype=complex).reshape(4)
    return np.outer(ket, ket.conj())


def validate_density(m: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Check and normalize a candidate two-qubit density matrix.

    Eigenvalues in [-tol, 0) are clipped to zero and the state is
    renormalized; anything worse raises.

    Parameters
    ----------
    m : array_like (4, 4)
        Candidate matrix.
    tol : float
        Tolerance for Hermiticity, trace and positivity violations.

    Returns
    -------
    ndarray
        Validated density matrix (Hermitian, PSD, unit trace).

    Raises
    ------
    NotHermitianError, BadTraceError, NotPSDError
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    herm_defect = np.abs(m - m.conj().T).max()
    if herm_defect > tol:
        raise NotHermitianError(f"Hermiticity violated by {herm_defect:.3e}")
    m = (m + m.conj().T) / 2
    tr = np.trace(m).real
    if abs(tr - 1.0) > tol:
        raise BadTraceError(f"trace is {tr!r}, expected 1")
    w, v = np.linalg.eigh(m)
    if w.min() < -tol:
        raise NotPSDError(f"negative eigenvalue {w.min():.3e}")
    if w.min() < 0.0:
        w = np.clip(w, 0.0, None)
        m = (v * w) @ v.conj().T
        m = m / np.trace(m).real
    return m


def to_rmatrix(rho: np.ndarray) -> np.ndarray:
    """Correlation representation R_ij = Tr(rho sigma_i (x) sigma_j).

    R is real 4x4 with R_00 = 1 for a unit-trace state.
    """
    return np.einsum("xyab,ba->xy", PAULI_PRODUCTS, rho).real


def from_rmatrix(r: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Inverse of :func:`to_rmatrix`: rho = (1/4) sum_ij R_ij sigma_i (x) sigma_j.

    Raises NotPSDError when R does not correspond to a physical state.
    """
    r = np.asarray(r, dtype=float)
    if abs(r[0, 0] - 1.0) > tol:
        raise BadTraceError(f"R_00 is {r[0, 0]!r}, expected 1")
    rho = np.einsum("xy,xyab->ab", r, PAULI_PRODUCTS) / 4.0
    return validate_density(rho, tol=max(tol, 1e-10))


def correlation_matrix(rho: np.ndarray) -> np.ndarray:
    """The 3x3 spin-correlation block T_ij = Tr(rho sigma_i (x) sigma_j), i,j >= 1."""
    return to_rmatrix(rho)[1:, 1:]


UNITARY = "unitary"
FILTER = "filter"
GENERAL = "general"


@dataclass(frozen=True, eq=False)
class LocalOp:
    """A single-qubit operator together with its physical role.

    Filters must have largest singular value <= 1 so that they can be
    implemented as a probabilistic loss element; unitaries must satisfy
    U^dag U = I.
    """

    matrix: np.ndarray
    kind: str = GENERAL

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)
        if self.kind == UNITARY:
            defect = np.abs(m.conj().T @ m - np.eye(2)).max()
            if defect > 1e-12:
                raise ValueError(f"not unitary, U^dag U deviates by {defect:.3e}")
        elif self.kind == FILTER:
            smax = np.linalg.svd(m, compute_uv=False)[0]
            if smax > 1 + 1e-12:
                raise ValueError(f"filter norm {smax!r} exceeds 1")
        elif self.kind != GENERAL:
            raise ValueError(f"unknown LocalOp kind {self.kind!r}")

    @classmethod
    def unitary(cls, m) -> "LocalOp":
        return cls(np.asarray(m, dtype=complex), UNITARY)

    @classmethod
    def filter(cls, m) -> "LocalOp":
        return cls(np.asarray(m, dtype=complex), FILTER)

    @classmethod
    def identity(cls) -> "LocalOp":
        return cls(np.eye(2, dtype=complex), UNITARY)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    def compose(self, other: "LocalOp") -> "LocalOp":
        """self applied after other (matrix product self @ other)."""
        return LocalOp(self.matrix @ other.matrix, GENERAL)


@dataclass(frozen=True, eq=False)
class FilteredOutcome:
    """Post-selected state and the success probability of the filtering event."""

    state: np.ndarray
    probability: float


def apply_local(rho: np.ndarray, a: LocalOp, b: LocalOp) -> FilteredOutcome:
    """Apply (A (x) B) rho (A (x) B)^dag and renormalize.

    The success probability is the trace of the unnormalized output,
    which lies in (0, 1] whenever both operators have largest singular
    value <= 1.

    Raises ZeroProbabilityError when the filter annihilates the state.
    """
    op = np.kron(a.matrix, b.matrix)
    out = op @ rho @ op.conj().T
    p = np.trace(out).real
    if p <= 1e-14:
        raise ZeroProbabilityError(f"success probability {p:.3e}")
    return FilteredOutcome(state=validate_density(out / p, tol=1e-9), probability=p)


def reduced_state(rho: np.ndarray, side: str) -> np.ndarray:
    """Partial trace down to one qubit; side is 'alice' or 'bob'."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if side == "alice":
        return np.einsum("ikjk->ij", r)
    if side == "bob":
        return np.einsum("kikj->ij", r)
    raise ValueError(f"side must be 'alice' or 'bob', got {side!r}")


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition."""
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Symmetric in its arguments and equal to |<psi|phi>|^2 on pure states.
    The unsquared convention is sqrt of this value; reports carry both.
    Computed as the squared nuclear norm of sqrt(rho) sqrt(sigma), whose
    Gram matrix is exactly sqrt(rho) sigma sqrt(rho); near-zero singular
    values then stay at machine precision.
    """
    k = _sqrtm_psd(rho) @ _sqrtm_psd(sigma)
    root = np.sum(np.linalg.svd(k, compute_uv=False))
    return float(min(root**2, 1.0))
