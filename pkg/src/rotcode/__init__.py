"""Bosonic rotation codes under loss and dephasing.

Construction of number-phase rotation codes (trivial, binomial, cat, and
Haar-random families), simulation of simultaneous photon loss and dephasing
by exponentiating the Lindbladian superoperator, optimal-recovery channel
fidelity via semidefinite programming, phase-space (Wigner) evaluation, and
a sweep harness for mapping code performance across noise grids.
"""

__version__ = "0.1.0"

from rotcode.fock_linalg import (
    annihilation_op,
    expm,
    expm_action,
    kron,
    number_op,
    partial_trace,
    unvec,
    vec,
)
from rotcode.haar_sampling import SeededRng, haar_state, haar_unitary
from rotcode.rotation_codes import (
    Code,
    avg_photon,
    binomial_code,
    cat_code,
    code_projector,
    default_cutoff,
    encoder_isometry,
    one_rand_code,
    stabilizer_residual,
    trivial_code,
    two_rand_code,
)
from rotcode.noise_channel import (
    NoisePoint,
    dissipator_superop,
    loss_dephasing_channel,
)
from rotcode.channel_metrics import (
    INFIDELITY_FLOOR,
    ChoiMatrix,
    channel_fidelity,
    choi_to_superop,
    compose_choi,
    compose_logical_channel,
    floored_infidelity,
    superop_to_choi,
)
from rotcode.optimal_recovery import (
    RecoveryProblem,
    RecoverySolution,
    SolverFailure,
    baseline_recovery,
    build_recovery_problem,
    solve_optimal_recovery,
)
from rotcode.wigner import PhaseGrid, wigner, wigner_points
from rotcode.sweep import (
    SweepConfig,
    SweepRecord,
    evaluate_point,
    noise_grid,
    optimize_family,
    phase_diagram,
)

__all__ = [
    "annihilation_op",
    "number_op",
    "kron",
    "vec",
    "unvec",
    "partial_trace",
    "expm",
    "expm_action",
    "SeededRng",
    "haar_state",
    "haar_unitary",
    "Code",
    "trivial_code",
    "binomial_code",
    "cat_code",
    "one_rand_code",
    "two_rand_code",
    "encoder_isometry",
    "code_projector",
    "avg_photon",
    "stabilizer_residual",
    "default_cutoff",
    "NoisePoint",
    "dissipator_superop",
    "loss_dephasing_channel",
    "ChoiMatrix",
    "superop_to_choi",
    "choi_to_superop",
    "compose_choi",
    "compose_logical_channel",
    "channel_fidelity",
    "floored_infidelity",
    "INFIDELITY_FLOOR",
    "RecoveryProblem",
    "RecoverySolution",
    "SolverFailure",
    "build_recovery_problem",
    "solve_optimal_recovery",
    "baseline_recovery",
    "PhaseGrid",
    "wigner",
    "wigner_points",
    "SweepConfig",
    "SweepRecord",
    "noise_grid",
    "evaluate_point",
    "optimize_family",
    "phase_diagram",
]
