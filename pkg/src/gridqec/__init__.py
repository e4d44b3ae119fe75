"""Finite-energy grid-code QEC simulator and analysis toolkit."""

__version__ = "0.1.0"

from .fock import (  # noqa: F401
    FockSpace,
    Operator,
    QuantumState,
    WignerGrid,
    displacement,
    hermitian_function,
    make_oscillator_ops,
    tensor,
    wigner,
)
from .gridcode import (  # noqa: F401
    GridCode,
    LatticeMatrix,
    SubspaceHierarchy,
    build_code,
    knill_laflamme_check,
    logical_pauli,
    subspace_hierarchy,
)
from .channels import (  # noqa: F401
    KrausSet,
    NoiseParams,
    PauliTransferMatrix,
    ancilla_channel,
    apply_channel,
    avg_channel_fidelity,
    depolarization_rate,
    loss_dephasing_channel,
    ptm_of_logical_channel,
    sample_kraus,
)
from .sbs import (  # noqa: F401
    CycleConfig,
    SyndromeDataset,
    TrajectoryRecord,
    cooling_cycle,
    expected_feedback_rounds,
    inject_displacement,
    phase_estimation_readout,
    rank4_cycle,
    run_trajectory,
    sbs_kraus,
)
from .circuits import (  # noqa: F401
    CircuitParams,
    EcdCalibration,
    GateSequence,
    build_circuit_unitary,
    compile_ecd,
    cr_gate,
    ecd_gate,
    phase_correction,
    sbs_nominal_params,
)
from .optimize import (  # noqa: F401
    ObjectiveSpec,
    PolicyState,
    QecRewardEnv,
    optimize_circuit,
    qec_reward_episode,
    rl_train,
)
from .analysis import (  # noqa: F401
    DecayFit,
    GgFit,
    ReconstructionResult,
    correlation_matrix,
    fit_gg_decay,
    fit_state_decay,
    gg_string_probability,
    leakage_stats,
    postselect,
    reconstruct_density,
    sensitivity_sweep,
)
