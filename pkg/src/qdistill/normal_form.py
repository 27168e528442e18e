"""Filter normal form: optimal local filtering of a two-qubit state.

The normal form of a state under local filtering is the representative
of its filtering orbit with both single-qubit marginals maximally mixed;
it is Bell diagonal after a final pair of local unitaries and carries
the largest concurrence and CHSH violation reachable by local filtering.
It is computed here by alternately whitening the two marginals with
(2 rho_marginal)^(-1/2) until both are I/2.

States whose correlation matrix cannot be brought to this form by
invertible filters are labeled quasi-distillable (the iteration's
success probability shrinks towards zero without marginal convergence)
or degenerate (a marginal is singular).
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import MarginalsNotMixedError, NotRotationError, SingularOperatorError
from .states import (
    FILTER,
    PAULIS,
    UNITARY,
    LocalOp,
    apply_local,
    correlation_matrix,
    reduced_state,
    validate_density,
)

#: Minkowski metric of the correlation picture.
ETA = np.diag([1.0, -1.0, -1.0, -1.0])

BELL_DIAGONALIZABLE = "bell_diagonalizable"
QUASI_DISTILLABLE = "quasi_distillable"
DEGENERATE = "degenerate"

#: Columns are the Bell states Phi+, Phi-, Psi+, Psi- in the fixed basis.
BELL_BASIS = (
    np.array(
        [
            [1, 1, 0, 0],
            [0, 0, 1, 1],
            [0, 0, 1, -1],
            [1, -1, 0, 0],
        ],
        dtype=complex,
    )
    / np.sqrt(2)
)

BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


def bell_probabilities(rho: np.ndarray) -> np.ndarray:
    """Diagonal of rho in the Bell basis, ordered (Phi+, Phi-, Psi+, Psi-)."""
    return np.real(np.diag(BELL_BASIS.conj().T @ rho @ BELL_BASIS))


def lorentz_of(a) -> np.ndarray:
    """Correlation-picture image L(A)_ij = Tr[sigma_i A sigma_j A^dag] / 2.

    For det A = 1 this is a proper orthochronous Lorentz transformation,
    and to_rmatrix((A (x) B) rho (A (x) B)^dag) = L(A) R L(B)^T holds for
    the unnormalized output.
    """
    m = a.matrix if isinstance(a, LocalOp) else np.asarray(a, dtype=complex)
    if np.linalg.svd(m, compute_uv=False)[-1] <= 1e-12:
        raise SingularOperatorError("operator is numerically singular")
    md = m.conj().T
    return np.real(np.einsum("iab,bc,jcd,da->ij", PAULIS, m, PAULIS, md)) / 2.0


@dataclass(frozen=True, eq=False)
class NormalFormResult:
    """Outcome of the normal-form computation.

    For classification 'bell_diagonalizable' the filters have largest
    singular value 1 and `state` is the successfully filtered state with
    maximally mixed marginals; `probability` is the success probability
    of applying both filters to the input.  For the other labels the
    fields hold the last iterate.
    """

    state: np.ndarray
    filter_a: LocalOp
    filter_b: LocalOp
    probability: float
    iterations: int
    classification: str


def _inv_sqrt_2x2(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v / np.sqrt(2.0 * w)) @ v.conj().T


def _normalized(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.svd(m, compute_uv=False)[0]


def filter_normal_form(
    rho: np.ndarray, tol: float = 1e-10, max_iter: int = 10000
) -> NormalFormResult:
    """Whiten both marginals to I/2 by alternating local filters.

    Bob's marginal is whitened first each round, so a state that needs
    only a unilateral filter gets it on Bob's side.  The accumulated
    filters are rescaled to largest singular value 1, which maximizes
    the success probability over physical implementations.
    """
    ident = np.eye(2, dtype=complex)
    total_a = ident.copy()
    total_b = ident.copy()
    cur = np.asarray(rho, dtype=complex)
    p_run = 1.0
    iterations = 0

    def result(classification: str, prob: float) -> NormalFormResult:
        return NormalFormResult(
            state=validate_density(cur, tol=1e-8),
            filter_a=LocalOp(_normalized(total_a), FILTER),
            filter_b=LocalOp(_normalized(total_b), FILTER),
            probability=prob,
            iterations=iterations,
            classification=classification,
        )

    for iterations in range(1, max_iter + 1):
        marg_a = reduced_state(cur, "alice")
        marg_b = reduced_state(cur, "bob")
        dist = max(np.abs(marg_a - ident / 2).max(), np.abs(marg_b - ident / 2).max())
        if dist <= tol:
            iterations -= 1
            break

        if np.linalg.eigvalsh(marg_b).min() < 1e-12:
            return result(DEGENERATE, p_run)
        f = _inv_sqrt_2x2(marg_b)
        total_b = f @ total_b
        op = np.kron(ident, f)
        cur = op @ cur @ op.conj().T
        cur /= np.trace(cur).real

        marg_a = reduced_state(cur, "alice")
        if np.linalg.eigvalsh(marg_a).min() < 1e-12:
            return result(DEGENERATE, p_run)
        f = _inv_sqrt_2x2(marg_a)
        total_a = f @ total_a
        op = np.kron(f, ident)
        cur = op @ cur @ op.conj().T
        cur /= np.trace(cur).real

        op = np.kron(_normalized(total_a), _normalized(total_b))
        p_run = np.trace(op @ rho @ op.conj().T).real
        if p_run < 1e-8:
            return result(QUASI_DISTILLABLE, p_run)
    else:
        # Exhausted max_iter with the filter still strengthening: the
        # orbit only reaches the normal form asymptotically.
        return result(QUASI_DISTILLABLE, p_run)

    op = np.kron(_normalized(total_a), _normalized(total_b))
    out = op @ rho @ op.conj().T
    prob = np.trace(out).real
    cur = out / prob
    return result(BELL_DIAGONALIZABLE, prob)


def su2_from_so3(o: np.ndarray) -> LocalOp:
    """Lift a 3x3 proper rotation to the 2x2 unitary that implements it.

    The returned U satisfies U (v . sigma) U^dag = (O v) . sigma, i.e. the
    spatial block of lorentz_of(U) equals O; U is fixed up to global sign.
    """
    o = np.asarray(o, dtype=float)
    if np.abs(o.T @ o - np.eye(3)).max() > 1e-9 or abs(np.linalg.det(o) - 1.0) > 1e-9:
        raise NotRotationError("not a proper rotation within tolerance")
    x, y, z, w = Rotation.from_matrix(o).as_quat()
    u = w * np.eye(2) - 1j * (x * PAULIS[1] + y * PAULIS[2] + z * PAULIS[3])
    return LocalOp(u, UNITARY)


# Bob-side pi rotations that move each Bell state onto Phi+ while keeping
# the correlation matrix diagonal: index matches BELL_LABELS.
_FIXUPS = (
    np.eye(3),
    np.diag([-1.0, -1.0, 1.0]),
    np.diag([1.0, -1.0, -1.0]),
    np.diag([-1.0, 1.0, -1.0]),
)


def bell_diagonalize(rho: np.ndarray, tol: float = 1e-8):
    """Rotate a state with maximally mixed marginals into Bell-diagonal form.

    Decomposes the correlation block T = O_A Sigma O_B^T with O_A, O_B in
    SO(3) (sign factors folded into Sigma), lifts the rotations to local
    unitaries and flips the dominant Bell component onto Phi+.

    Returns (u_a, u_b, state).
    """
    ident = np.eye(2) / 2
    if (
        np.abs(reduced_state(rho, "alice") - ident).max() > tol
        or np.abs(reduced_state(rho, "bob") - ident).max() > tol
    ):
        raise MarginalsNotMixedError("marginals deviate from I/2 beyond tolerance")
    t = correlation_matrix(rho)
    if np.abs(t - np.diag(np.diag(t))).max() < 1e-12:
        rot_a = np.eye(3)
        rot_b = np.eye(3)
        c = np.diag(t).copy()
    else:
        u, s, vt = np.linalg.svd(t)
        da = np.diag([1.0, 1.0, np.linalg.det(u)])
        db = np.diag([1.0, 1.0, np.linalg.det(vt)])
        rot_a = (u @ da).T
        rot_b = (db @ vt)
        c = s * np.array([1.0, 1.0, np.linalg.det(u) * np.linalg.det(vt)])
    probs = (
        np.array(
            [
                1 + c[0] - c[1] + c[2],
                1 - c[0] + c[1] + c[2],
                1 + c[0] + c[1] - c[2],
                1 - c[0] - c[1] - c[2],
            ]
        )
        / 4.0
    )
    rot_b = _FIXUPS[int(np.argmax(probs))] @ rot_b
    u_a = su2_from_so3(rot_a)
    u_b = su2_from_so3(rot_b)
    state = apply_local(rho, u_a, u_b).state
    return u_a, u_b, state


def optimal_filters(
    rho: np.ndarray, tol: float = 1e-10, max_iter: int = 10000
) -> NormalFormResult:
    """Optimal local filters distilling rho into its Bell-diagonal normal form.

    Composes the marginal-whitening filters with the Bell-diagonalizing
    unitaries; each final filter is rescaled to largest singular value 1.
    Non-distillable classifications are returned, not raised.
    """
    nf = filter_normal_form(rho, tol=tol, max_iter=max_iter)
    if nf.classification != BELL_DIAGONALIZABLE:
        return nf
    u_a, u_b, _ = bell_diagonalize(nf.state, tol=max(1e-8, 10 * tol))
    filt_a = LocalOp(_normalized(u_a.matrix @ nf.filter_a.matrix), FILTER)
    filt_b = LocalOp(_normalized(u_b.matrix @ nf.filter_b.matrix), FILTER)
    outcome = apply_local(rho, filt_a, filt_b)
    return NormalFormResult(
        state=outcome.state,
        filter_a=filt_a,
        filter_b=filt_b,
        probability=outcome.probability,
        iterations=nf.iterations,
        classification=BELL_DIAGONALIZABLE,
    )


def classify_state(rho: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> str:
    """Label rho as bell_diagonalizable, quasi_distillable or degenerate."""
    return filter_normal_form(rho, tol=tol, max_iter=max_iter).classification
