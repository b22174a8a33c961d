"""Desk-scale laboratory for disordered multi-particle lattice models.

The package builds finite-cube Hamiltonians with alloy-type disorder
whose bump functions tile the lattice flatly, then measures the
spectral and dynamical quantities that drive localization arguments:
eigenvalue concentration, resolvent decay, scale induction statistics,
and eigenfunction-correlator decay in the symmetrized configuration
distance.
"""

from .evc import (
    EvcResult,
    eigenvalue_shift_test,
    shift_identity_experiment,
    wegner_one_volume,
    wegner_two_volume,
)
from .geometry import (
    Cube,
    Configuration,
    WeakSeparation,
    check_weak_separation,
    classify_wi_si,
    config,
    cube_points,
    hausdorff_distance,
    max_norm,
    sym_distance,
    weakly_separated,
    wi_decompose,
)
from .harness import (
    ExperimentConfig,
    ResultRecord,
    load_config,
    parse_config,
    read_result,
    report,
    run,
    serialize_config,
)
from .model import (
    DisorderSample,
    HamiltonianMatrix,
    ModelSpec,
    assemble_hamiltonian,
    derive_seed,
    sample_disorder,
    shift_amplitudes,
)
from .msa import (
    EXPLORATORY_PARAMS,
    DominatedBound,
    DominationReport,
    GraphFunction,
    ScaleParams,
    classify_bad_good,
    dominated_bound,
    efc_decay_experiment,
    estimate_singularity_prob,
    etv_covering_experiment,
    etv_energy_sweep,
    generate_dominated_instances,
    implication_experiment,
    lattice_graph_function,
    require_valid,
    scale_sequence,
    validate_params,
    verify_domination,
    verify_predicate,
    wi_tensor_check,
)
from .spectral import (
    DEFAULT_C_GRI,
    ResonantEnergyError,
    boundary_green_curve,
    classify_cnr,
    classify_nr,
    classify_ns,
    efc_kernel,
    eigensolve,
    green_column,
    gri_verify,
    time_amplitude,
)

__version__ = "0.1.0"

__all__ = [
    "EvcResult",
    "eigenvalue_shift_test",
    "shift_identity_experiment",
    "wegner_one_volume",
    "wegner_two_volume",
    "Cube",
    "Configuration",
    "WeakSeparation",
    "check_weak_separation",
    "classify_wi_si",
    "config",
    "cube_points",
    "hausdorff_distance",
    "max_norm",
    "sym_distance",
    "weakly_separated",
    "wi_decompose",
    "ExperimentConfig",
    "ResultRecord",
    "load_config",
    "parse_config",
    "read_result",
    "report",
    "run",
    "serialize_config",
    "DisorderSample",
    "HamiltonianMatrix",
    "ModelSpec",
    "assemble_hamiltonian",
    "derive_seed",
    "sample_disorder",
    "shift_amplitudes",
    "EXPLORATORY_PARAMS",
    "DominatedBound",
    "DominationReport",
    "GraphFunction",
    "ScaleParams",
    "classify_bad_good",
    "dominated_bound",
    "efc_decay_experiment",
    "estimate_singularity_prob",
    "etv_covering_experiment",
    "etv_energy_sweep",
    "generate_dominated_instances",
    "implication_experiment",
    "lattice_graph_function",
    "require_valid",
    "scale_sequence",
    "validate_params",
    "verify_domination",
    "verify_predicate",
    "wi_tensor_check",
    "DEFAULT_C_GRI",
    "ResonantEnergyError",
    "boundary_green_curve",
    "classify_cnr",
    "classify_nr",
    "classify_ns",
    "efc_kernel",
    "eigensolve",
    "green_column",
    "gri_verify",
    "time_amplitude",
    "__version__",
]
