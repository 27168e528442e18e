"""Simulated photon-counting tomography.

Coincidence counts for the 16 product projectors built from the
single-photon analyzer states H, V, D = (H+V)/sqrt(2), L = (H+iV)/sqrt(2)
are drawn from Poisson distributions with mean budget * Tr[rho P_i].
Reconstruction is linear inversion (possibly unphysical) refined by a
maximum-likelihood fit over the Cholesky cone, and error bars come from
a parametric Poisson bootstrap.

Randomness contract: every (seed, task index) pair owns an independent
substream, so counts and bootstrap results do not depend on evaluation
order and are reproducible bit for bit.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .errors import AllZeroCountsError, EmptyCountsError, SingularSystemError
from .states import PAULI_PRODUCTS, validate_density

BASIS_LABELS = ("H", "V", "D", "L")

_KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "L": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0),
}


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    """16 ordered analyzer settings; labels[k] = (alice_basis, bob_basis)."""

    labels: tuple
    projectors: np.ndarray


def tomography_projectors() -> ProjectorSet:
    """The standard 4x4 product set, row-major in (H, V, D, L); entry 0 is |HH><HH|."""
    labels = []
    projs = []
    for la in BASIS_LABELS:
        for lb in BASIS_LABELS:
            ket = np.kron(_KETS[la], _KETS[lb])
            labels.append((la, lb))
            projs.append(np.outer(ket, ket.conj()))
    return ProjectorSet(labels=tuple(labels), projectors=np.array(projs))


_STANDARD_SET = tomography_projectors()

# Indices of the complete H/V projective quadruple, used to estimate the
# pair budget from raw counts when it is not recorded alongside them.
_HV_SETTINGS = tuple(
    k for k, (la, lb) in enumerate(_STANDARD_SET.labels) if la in "HV" and lb in "HV"
)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Counts for the 16 settings plus the acquisition budget that produced them.

    Counts are kept as floats so that exact-mean (noiseless) records can
    be represented; simulated records always hold integers.
    """

    counts: np.ndarray
    budget: float
    seed: object = None
    settings: ProjectorSet = field(default=_STANDARD_SET)

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float).reshape(16)
        if (c < 0).any():
            raise ValueError("counts must be non-negative")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        object.__setattr__(self, "counts", c)


def setting_probabilities(rho: np.ndarray, settings: ProjectorSet | None = None) -> np.ndarray:
    """Detection probabilities Tr[rho P_k] for each analyzer setting."""
    ps = settings or _STANDARD_SET
    return np.einsum("kij,ji->k", ps.projectors, rho).real


def simulate_counts(rho: np.ndarray, budget: float, seed) -> MeasurementRecord:
    """Draw n_k ~ Poisson(budget * Tr[rho P_k]), one substream per setting."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    probs = np.clip(setting_probabilities(rho), 0.0, None)
    entropy = seed if isinstance(seed, (tuple, list)) else (seed,)
    counts = np.empty(16)
    for k in range(16):
        rng = np.random.default_rng(np.random.SeedSequence((*entropy, k)))
        counts[k] = rng.poisson(budget * probs[k])
    return MeasurementRecord(counts=counts, budget=budget, seed=seed)


def exact_record(rho: np.ndarray, budget: float) -> MeasurementRecord:
    """Noiseless record whose counts equal the Poisson means exactly."""
    return MeasurementRecord(
        counts=budget * setting_probabilities(rho), budget=budget, seed=None
    )


_PAULI_FLAT = PAULI_PRODUCTS.reshape(16, 4, 4)
_DESIGN = np.einsum(
    "kij,mji->km", _STANDARD_SET.projectors, _PAULI_FLAT
).real / 4.0


def linear_reconstruct(record: MeasurementRecord) -> np.ndarray:
    """Solve Tr[rho P_k] = n_k / budget for a Hermitian unit-trace matrix.

    The result can have negative eigenvalues at low counts; it is
    returned as-is and callers needing a physical state should follow up
    with :func:`mle_reconstruct`.
    """
    if record.settings is not _STANDARD_SET:
        design = np.einsum(
            "kij,mji->km", record.settings.projectors, _PAULI_FLAT
        ).real / 4.0
    else:
        design = _DESIGN
    if np.linalg.matrix_rank(design, tol=1e-10) < 16:
        raise SingularSystemError("projector set does not span operator space")
    r = np.linalg.solve(design, record.counts / record.budget)
    rho = np.einsum("m,mij->ij", r, _PAULI_FLAT) / 4.0
    rho = (rho + rho.conj().T) / 2.0
    return rho / np.trace(rho).real


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    state: np.ndarray
    nll: float
    iterations: int
    converged: bool


_TRIL_R, _TRIL_C = np.tril_indices(4)
_OFFDIAG = _TRIL_R != _TRIL_C


def _t_matrix(params: np.ndarray) -> np.ndarray:
    t = np.zeros((4, 4), dtype=complex)
    t[_TRIL_R, _TRIL_C] = params[:10]
    t[_TRIL_R[_OFFDIAG], _TRIL_C[_OFFDIAG]] += 1j * params[10:]
    return t


def _params_of(t: np.ndarray) -> np.ndarray:
    return np.concatenate(
        [t[_TRIL_R, _TRIL_C].real, t[_TRIL_R[_OFFDIAG], _TRIL_C[_OFFDIAG]].imag]
    )


def poisson_nll(rho: np.ndarray, record: MeasurementRecord) -> float:
    """sum_k [budget p_k - n_k ln(budget p_k)] up to the n-dependent constant."""
    p = np.clip(setting_probabilities(rho, record.settings), 1e-15, None)
    mu = record.budget * p
    return float(np.sum(mu - record.counts * np.log(mu)))


def _nll_and_grad(params, record):
    t = _t_matrix(params)
    gram = t.conj().T @ t
    tau = np.trace(gram).real
    rho = gram / tau
    p = np.clip(setting_probabilities(rho, record.settings), 1e-15, None)
    mu = record.budget * p
    f = np.sum(mu - record.counts * np.log(mu))
    weights = record.budget - record.counts / p
    g_op = np.einsum("k,kij->ij", weights, record.settings.projectors)
    scale = np.trace(g_op @ rho).real
    w = 2.0 * (t @ g_op - scale * t) / tau
    grad = np.empty(16)
    grad[:10] = w[_TRIL_R, _TRIL_C].real
    grad[10:] = w[_TRIL_R[_OFFDIAG], _TRIL_C[_OFFDIAG]].imag
    return f, grad


def _psd_start(record: MeasurementRecord) -> np.ndarray:
    rho = linear_reconstruct(record)
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 1e-6, None)
    w /= w.sum()
    return (v * w) @ v.conj().T


def mle_reconstruct(
    record: MeasurementRecord, tol: float = 1e-10, max_iter: int = 1000
) -> ReconstructionResult:
    """Maximum-likelihood state from a measurement record.

    rho(t) = T^dag T / Tr(T^dag T) with T lower triangular (16 real
    parameters) keeps the iterate physical by construction; the Poisson
    negative log-likelihood is minimized from the PSD-projected linear
    inversion.  Any monotone descent to the stated tolerance is
    compliant; L-BFGS with the analytic gradient is used here.  The
    returned NLL never exceeds the starting point's.
    """
    if not (record.counts > 0).any():
        raise AllZeroCountsError("record contains no events")
    start = _psd_start(record)
    t0 = _params_of(np.linalg.cholesky(start))
    f0, _ = _nll_and_grad(t0, record)
    res = minimize(
        _nll_and_grad,
        t0,
        args=(record,),
        jac=True,
        method="L-BFGS-B",
        options=dict(maxiter=max_iter, ftol=tol, gtol=1e-10),
    )
    params = res.x if res.fun <= f0 else t0
    t = _t_matrix(params)
    gram = t.conj().T @ t
    rho = validate_density(gram / np.trace(gram).real, tol=1e-9)
    return ReconstructionResult(
        state=rho,
        nll=float(min(res.fun, f0)),
        iterations=int(res.nit),
        converged=bool(res.success),
    )


@dataclass(frozen=True)
class BootstrapResult:
    mean: float
    std: float
    failures: int = 0


def bootstrap_measures(
    record: MeasurementRecord, resamples: int, estimators: dict, seed
) -> dict:
    """Parametric Poisson bootstrap evaluating several estimators per resample.

    Each resample draws n'_k ~ Poisson(n_k) on its own substream, runs the
    full MLE reconstruction, and evaluates every estimator on the result.
    Resamples whose reconstruction fails are counted, not propagated.
    """
    if resamples < 2:
        raise ValueError("need at least 2 resamples")
    entropy = seed if isinstance(seed, (tuple, list)) else (seed,)
    values = {name: [] for name in estimators}
    failures = 0
    for r in range(resamples):
        counts = np.empty(16)
        for k in range(16):
            rng = np.random.default_rng(np.random.SeedSequence((*entropy, r, k)))
            counts[k] = rng.poisson(record.counts[k])
        try:
            resampled = replace(record, counts=counts, seed=None)
            state = mle_reconstruct(resampled).state
        except AllZeroCountsError:
            failures += 1
            continue
        for name, fn in estimators.items():
            values[name].append(fn(state))
    out = {}
    for name, vals in values.items():
        arr = np.asarray(vals, dtype=float)
        if arr.size < 2:
            raise EmptyCountsError("too few successful resamples")
        out[name] = BootstrapResult(
            mean=float(arr.mean()), std=float(arr.std(ddof=1)), failures=failures
        )
    return out


def bootstrap_measure(
    record: MeasurementRecord, resamples: int, estimator, seed
) -> BootstrapResult:
    """Bootstrap mean and standard deviation of a single scalar estimator."""
    return bootstrap_measures(record, resamples, {"value": estimator}, seed)["value"]


def write_counts_csv(path, record: MeasurementRecord) -> None:
    """Counts file: header + rows (setting_index, alice_basis, bob_basis, count)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["setting_index", "alice_basis", "bob_basis", "count"])
        for k, (la, lb) in enumerate(record.settings.labels):
            count = record.counts[k]
            writer.writerow([k, la, lb, int(count) if count == int(count) else count])


def read_counts_csv(path, budget: float | None = None) -> MeasurementRecord:
    """Read a counts file; the budget defaults to the total of the H/V quadruple."""
    counts = np.zeros(16)
    seen = set()
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            k = int(row["setting_index"])
            la, lb = row["alice_basis"].strip(), row["bob_basis"].strip()
            if not 0 <= k < 16 or (la, lb) != _STANDARD_SET.labels[k]:
                raise ValueError(f"row {row!r} does not match the standard setting order")
            counts[k] = float(row["count"])
            seen.add(k)
    if len(seen) != 16:
        raise ValueError(f"expected 16 settings, found {len(seen)}")
    if budget is None:
        budget = counts[list(_HV_SETTINGS)].sum()
        if budget <= 0:
            raise EmptyCountsError("cannot infer budget: H/V quadruple is empty")
    return MeasurementRecord(counts=counts, budget=float(budget), seed=None)
