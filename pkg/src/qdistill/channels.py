"""State preparation and bilateral phase-damping decoherence.

The source model is a polarization-entangled pair a|HH> + b|VV>; the
decoherence model is one phase-damping channel per arm with Kraus pair
{sqrt(1-p) I, sqrt(p) sigma}, dephasing either in the {H+V, H-V} basis
(sigma_x) or the {H, V} basis (sigma_z).  Closed forms for the two
resulting mixed-state families are provided alongside the generic
Kraus-composition path and must agree elementwise.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotNormalizedError, OutOfRangeError
from .states import (
    FILTER,
    SIGMA_0,
    SIGMA_X,
    SIGMA_Z,
    LocalOp,
    ket_to_density,
    validate_density,
)

X_DEPHASING = "x-dephasing"
Z_DEPHASING = "z-dephasing"
IDENTITY = "identity"
CUSTOM = "custom"


@dataclass(frozen=True)
class PrepParams:
    """Real amplitudes of the source state a|HH> + b|VV>."""

    a: float
    b: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise NotNormalizedError("amplitudes must be non-negative")
        norm = self.a**2 + self.b**2
        if abs(norm - 1.0) > 1e-9:
            raise NotNormalizedError(f"a^2 + b^2 = {norm!r}, expected 1")


@dataclass(frozen=True, eq=False)
class LocalChannel:
    """Single-qubit channel given by its Kraus operators."""

    kraus: tuple
    basis_label: str = CUSTOM

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        object.__setattr__(self, "kraus", ks)
        total = sum(k.conj().T @ k for k in ks)
        defect = np.abs(total - np.eye(2)).max()
        if defect > 1e-12:
            raise ValueError(f"Kraus completeness violated by {defect:.3e}")


def prepare_spdc(params: PrepParams, phase: float = 0.0) -> np.ndarray:
    """Pure-state density matrix of a|HH> + e^{i phase} b|VV>.

    No silent renormalization: params must already satisfy a^2 + b^2 = 1.
    """
    ket = np.array([params.a, 0.0, 0.0, params.b * np.exp(1j * phase)])
    return validate_density(ket_to_density(ket), tol=1e-8)


def identity_channel() -> LocalChannel:
    return LocalChannel((SIGMA_0.copy(),), IDENTITY)


def dephasing_channel(basis: str, p: float) -> LocalChannel:
    """Phase-damping channel {sqrt(1-p) I, sqrt(p) sigma_basis}.

    basis 'x' dephases in {H+V, H-V}; basis 'z' dephases in {H, V}.
    """
    if not 0.0 <= p <= 1.0:
        raise OutOfRangeError(f"dephasing probability {p!r} outside [0, 1]")
    basis = basis.lower()
    if basis == "x":
        sigma, label = SIGMA_X, X_DEPHASING
    elif basis == "z":
        sigma, label = SIGMA_Z, Z_DEPHASING
    else:
        raise ValueError(f"basis must be 'x' or 'z', got {basis!r}")
    return LocalChannel((np.sqrt(1 - p) * SIGMA_0, np.sqrt(p) * sigma), label)


def apply_bilateral(rho: np.ndarray, ch_a: LocalChannel, ch_b: LocalChannel) -> np.ndarray:
    """rho' = sum_ij (K_i (x) L_j) rho (K_i (x) L_j)^dag.  Trace preserving."""
    out = np.zeros((4, 4), dtype=complex)
    for ka in ch_a.kraus:
        for kb in ch_b.kraus:
            op = np.kron(ka, kb)
            out += op @ rho @ op.conj().T
    return validate_density(out, tol=1e-9)


def _check_amplitudes(a: float, b: float) -> tuple[float, float]:
    # The published parameter pairs are rounded to two decimals (their
    # squares sum to ~0.994), so the closed forms accept small deviations
    # and renormalize jointly; gross violations are rejected.
    if a < 0 or b < 0:
        raise NotNormalizedError("amplitudes must be non-negative")
    norm = np.hypot(a, b)
    if abs(norm - 1.0) > 0.05:
        raise NotNormalizedError(f"a^2 + b^2 = {norm**2!r}, too far from 1")
    return a / norm, b / norm


def rho_form1(a: float, b: float, p: float) -> np.ndarray:
    """Mixed state after bilateral x-dephasing of a|HH> + b|VV>.

    Closed form; agrees with the Kraus composition elementwise.
    """
    if not 0.0 <= p <= 1.0:
        raise OutOfRangeError(f"dephasing probability {p!r} outside [0, 1]")
    a, b = _check_amplitudes(a, b)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = (p - 1) ** 2 + b**2 * (2 * p - 1)
    rho[1, 1] = p - p**2
    rho[2, 2] = p - p**2
    rho[3, 3] = p**2 - b**2 * (2 * p - 1)
    rho[0, 3] = rho[3, 0] = a * b * ((p - 1) ** 2 + p**2)
    rho[1, 2] = rho[2, 1] = 2 * a * b * p * (1 - p)
    return validate_density(rho, tol=1e-12)


def rho_form2(a: float, b: float, p: float) -> np.ndarray:
    """Mixed state after bilateral z-dephasing of a|HH> + b|VV>.

    Diagonal (a^2, 0, 0, b^2) with coherence a b (1 - 2p)^2; invariant
    under p -> 1 - p.
    """
    if not 0.0 <= p <= 1.0:
        raise OutOfRangeError(f"dephasing probability {p!r} outside [0, 1]")
    a, b = _check_amplitudes(a, b)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = a**2
    rho[3, 3] = b**2
    rho[0, 3] = rho[3, 0] = a * b * (-1 + 2 * p) ** 2
    return validate_density(rho, tol=1e-12)


def slide_filter(t_h: float, t_v: float) -> LocalOp:
    """Polarization-dependent loss element with intensity transmissions (t_h, t_v).

    Returns the amplitude filter diag(sqrt(t_h), sqrt(t_v)) rescaled so its
    largest singular value is 1; the discarded intensity is the loss.
    """
    if not (0.0 <= t_h <= 1.0 and 0.0 <= t_v <= 1.0):
        raise OutOfRangeError(f"transmissions ({t_h!r}, {t_v!r}) outside [0, 1]")
    amp = np.sqrt([t_h, t_v])
    top = amp.max()
    if top == 0.0:
        raise OutOfRangeError("filter blocks both polarizations")
    return LocalOp(np.diag(amp / top).astype(complex), FILTER)
