"""Optimal single-copy entanglement distillation of two-qubit mixed states.

Library plus CLI covering the full theoretical pipeline (state
preparation, bilateral dephasing, optimal local filters, entanglement and
CHSH measures) and the measurement workflow (16-projector tomography with
Poisson counts, maximum-likelihood reconstruction, bootstrap errors).
"""

__version__ = "0.1.0"

from .channels import (
    LocalChannel,
    PrepParams,
    apply_bilateral,
    dephasing_channel,
    identity_channel,
    prepare_spdc,
    rho_form1,
    rho_form2,
    slide_filter,
)
from .errors import QDistillError
from .fileio import load_state, save_state
from .measures import (
    ChshMax,
    ChshSettings,
    MeasureSet,
    chsh_max,
    chsh_value,
    concurrence,
    correlation_from_counts,
    eof_from_concurrence,
    measure_state,
    spin_flip,
)
from .normal_form import (
    BELL_DIAGONALIZABLE,
    DEGENERATE,
    QUASI_DISTILLABLE,
    NormalFormResult,
    bell_diagonalize,
    bell_probabilities,
    classify_state,
    filter_normal_form,
    lorentz_of,
    optimal_filters,
    su2_from_so3,
)
from .pipeline import (
    DistillationReport,
    ExperimentConfig,
    compare_to_experiment,
    emit_report,
    load_report,
    run_experiment,
)
from .states import (
    FilteredOutcome,
    LocalOp,
    apply_local,
    fidelity,
    from_rmatrix,
    reduced_state,
    to_rmatrix,
    validate_density,
)
from .tomography import (
    MeasurementRecord,
    ProjectorSet,
    ReconstructionResult,
    bootstrap_measure,
    exact_record,
    linear_reconstruct,
    mle_reconstruct,
    read_counts_csv,
    simulate_counts,
    tomography_projectors,
    write_counts_csv,
)
