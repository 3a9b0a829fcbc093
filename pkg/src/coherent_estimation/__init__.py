"""Optimal encoding and joint estimation of real parameters carried by coherent states."""

from .encoding import (
    ConstraintReport,
    EncodingMatrix,
    check_constraints,
    encode,
    energy_check,
    general_two_mode_encoding,
    identical_encoding_report,
    optimal_ellipse_points,
    optimal_two_mode_encoding,
)
from .errors import InfeasibleError, ProtocolError, SingularQFIM
from .fisher import (
    QFIM,
    numerical_qfim,
    qcrb,
    qfim,
    single_mode_qfim,
    sld_commutator_trace,
    two_mode_eigenvalues,
)
from .phase_space import (
    BeamSplitter,
    PhaseRotation,
    apply_beam_splitter,
    apply_network,
    apply_phase_rotation,
    coherent_overlap,
    homodyne_sample,
)
from .protocol import (
    MAX_ENHANCEMENT,
    feasible_parameter_region,
    max_enhancement_choice,
    rotation_angles,
    run_protocol,
    transmittance_for,
)
from .schemes import (
    DecodingNetwork,
    Scheme,
    decode,
    enhancement_ratio,
    individual_variances,
    n_mode_scheme,
    partition_modes,
    three_mode_scheme,
    two_mode_scheme,
)
from .simulate import (
    EstimationResult,
    ExperimentConfig,
    ellipse_trace,
    enhancement_curve,
    run_experiment,
    run_individual_baseline,
)

__version__ = "0.1.0"
