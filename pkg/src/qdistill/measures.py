"""Entanglement and nonlocality quantifiers.

Concurrence (Wootters), entanglement of formation, and the CHSH
combination S = E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2) of spin
correlations E(a,b) = Tr[rho (a.sigma) (x) (b.sigma)].  The maximal S of
a state is 2 sqrt(m1 + m2) with m1 >= m2 the two largest eigenvalues of
T^T T, reached at analyzer settings built from the principal directions
of the correlation block T.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import EmptyCountsError, OutOfRangeError
from .states import SIGMA_Y, _sqrtm_psd, correlation_matrix

_YY = np.kron(SIGMA_Y, SIGMA_Y)

TSIRELSON_BOUND = 2.0 * np.sqrt(2.0)


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """rho~ = (sigma_y (x) sigma_y) rho* (sigma_y (x) sigma_y)."""
    return _YY @ rho.conj() @ _YY


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence C = max(0, l1 - l2 - l3 - l4).

    The l_i are the square roots of the eigenvalues of rho rho~ in
    decreasing order.  They are computed as the singular values of
    sqrt(rho) (sigma_y (x) sigma_y) conj(sqrt(rho)), whose Gram matrix is
    exactly sqrt(rho) rho~ sqrt(rho); this keeps near-zero eigenvalues at
    machine precision instead of sqrt-amplifying their noise.
    """
    s = _sqrtm_psd(rho)
    lam = np.linalg.svd(s @ _YY @ s.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def eof_from_concurrence(c: float) -> float:
    """Entanglement of formation h((1 + sqrt(1 - C^2)) / 2) of a two-qubit state."""
    if not 0.0 <= c <= 1.0:
        raise OutOfRangeError(f"concurrence {c!r} outside [0, 1]")
    return _binary_entropy((1.0 + np.sqrt(1.0 - c * c)) / 2.0)


@dataclass(frozen=True, eq=False)
class ChshSettings:
    """Bloch measurement directions: a1, a2 for Alice and b1, b2 for Bob."""

    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError(f"setting {name} is not a unit vector")
            object.__setattr__(self, name, v)


#: Settings reaching the Tsirelson bound on Phi+ (z, x for Alice; diagonals for Bob).
CANONICAL_SETTINGS = ChshSettings(
    a1=np.array([0.0, 0.0, 1.0]),
    a2=np.array([1.0, 0.0, 0.0]),
    b1=np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0),
    b2=np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0),
)


def chsh_value(rho: np.ndarray, settings: ChshSettings) -> float:
    """S for the given settings; |S| <= 2 for any local hidden-variable model."""
    t = correlation_matrix(rho)
    return float(
        settings.a1 @ t @ settings.b1
        + settings.a1 @ t @ settings.b2
        + settings.a2 @ t @ settings.b1
        - settings.a2 @ t @ settings.b2
    )


@dataclass(frozen=True, eq=False)
class ChshMax:
    s_value: float
    settings: ChshSettings


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def chsh_max(rho: np.ndarray) -> ChshMax:
    """Maximal CHSH value 2 sqrt(m1 + m2) and the settings that attain it.

    Bob measures along b1, b2 = cos(chi) c1 +- sin(chi) c2 where c1, c2
    are the principal directions of T^T T belonging to m1 >= m2 and
    tan(chi) = sqrt(m2/m1); Alice measures along T(b1 + b2) and
    T(b1 - b2).  With this construction chsh_value equals the analytic
    maximum, which fixes the sign and ordering freedom.
    """
    t = correlation_matrix(rho)
    w, v = np.linalg.eigh(t.T @ t)
    m1, m2 = w[2], w[1]
    if m1 + m2 < 1e-14:
        return ChshMax(s_value=0.0, settings=CANONICAL_SETTINGS)
    c1, c2 = v[:, 2], v[:, 1]
    chi = np.arctan2(np.sqrt(max(m2, 0.0)), np.sqrt(m1))
    b1 = np.cos(chi) * c1 + np.sin(chi) * c2
    b2 = np.cos(chi) * c1 - np.sin(chi) * c2
    a1 = _unit(t @ (b1 + b2))
    diff = t @ (b1 - b2)
    if np.linalg.norm(diff) > 1e-12:
        a2 = _unit(diff)
    else:
        # m2 = 0: the second correlation direction carries no signal, so
        # any direction orthogonal to a1 leaves S unchanged.
        probe = np.eye(3)[np.argmin(np.abs(a1))]
        a2 = _unit(np.cross(a1, probe))
    return ChshMax(
        s_value=float(2.0 * np.sqrt(m1 + m2)),
        settings=ChshSettings(a1=a1, a2=a2, b1=b1, b2=b2),
    )


def correlation_from_counts(n_pp: int, n_pm: int, n_mp: int, n_mm: int) -> float:
    """E = (n_pp + n_mm - n_pm - n_mp) / total from four coincidence counts."""
    total = n_pp + n_pm + n_mp + n_mm
    if total <= 0:
        raise EmptyCountsError("no coincidences recorded for this setting pair")
    return float((n_pp + n_mm - n_pm - n_mp) / total)


@dataclass(frozen=True, eq=False)
class MeasureSet:
    """Concurrence, EoF and maximal CHSH value of a state, with the settings."""

    concurrence: float
    eof: float
    s_value: float
    settings: ChshSettings


def measure_state(rho: np.ndarray) -> MeasureSet:
    """Evaluate all measures of a state at its own optimal CHSH settings."""
    c = concurrence(rho)
    best = chsh_max(rho)
    return MeasureSet(
        concurrence=c,
        eof=eof_from_concurrence(min(c, 1.0)),
        s_value=best.s_value,
        settings=best.settings,
    )


def _waveplate_jones(theta: float, retardance: float) -> np.ndarray:
    """Jones matrix of a waveplate with fast axis at angle theta from H."""
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    ret = np.diag([1.0, np.exp(1j * retardance)])
    return rot @ ret @ rot.T


def bloch_to_waveplates(direction: np.ndarray) -> tuple[float, float]:
    """Analyzer angles (qwp_deg, hwp_deg) projecting onto a Bloch direction.

    Convention (report metadata only): light traverses the quarter-wave
    plate, then the half-wave plate, then an H-transmitting polarizer;
    the plate angles are fast-axis angles from horizontal, in degrees,
    chosen so the analyzer transmits the +1 eigenstate of direction.sigma
    (H/V on the Bloch z axis, diagonal basis on x, circular on y).
    """
    n = np.asarray(direction, dtype=float).reshape(3)
    n = n / np.linalg.norm(n)
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    ket = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])

    def loss(angles) -> float:
        q, h = angles
        out = _waveplate_jones(h, np.pi) @ _waveplate_jones(q, np.pi / 2) @ ket
        return 1.0 - abs(out[0]) ** 2

    grid = np.linspace(-np.pi / 2, np.pi / 2, 37)
    start = min(((q, h) for q in grid for h in grid), key=loss)
    res = minimize(loss, start, method="Nelder-Mead", options=dict(xatol=1e-12, fatol=1e-14))
    q, h = res.x
    return float(np.degrees(q)), float(np.degrees(h))
