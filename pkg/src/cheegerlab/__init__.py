"""Phase-retrieval stability on finite cyclic groups.

Wavelet-type transforms on Z_N, their reproducing kernels, kernel and graph
Cheeger constants, ambiguity constructions and the stability bounds that
connect them.
"""
from .errors import (
    BudgetError,
    DegenerateOverlapError,
    DimensionError,
    InapplicableBoundError,
    InvalidSpecError,
    LabError,
    PhasePropagationError,
    PreconditionError,
    UndefinedInputError,
    UnsupportedOrderError,
)
from .harmonic import Signal, convolve, dft, idft, inner, involute, norm, translate
from .filterbank import (
    FilterBank,
    build_custom,
    build_overlapping_shannon,
    build_shannon,
    check_calderon,
    check_spectral_injectivity,
    fourier_magnitude_consequences,
    random_bank,
)
from .transform import (
    CoefficientField,
    KernelOperator,
    analyze,
    apply_kernel,
    isometry_defect,
    kernel_entry,
    synthesize,
)
from .kernel_cheeger import (
    CheegerResult,
    Weight,
    build_test_function,
    commutator_norm_sq,
    sign_alignment_mask,
    stability_lower_bound,
    stability_upper_bound_real,
    verify_gs_identities,
    weighted_kernel_cheeger,
)
from .graph import (
    WeightedGraph,
    algebraic_connectivity,
    band_profile,
    build_graph,
    complex_upper_bound,
    equivalence_decomposition,
    graph_cheeger,
    kernel_vs_graph,
    product_commutator_check,
    retrievability_diagnosis,
    temporal_algebraic_connectivity,
)
from .ambiguity import AmbiguitySpec, band_projection, synthesize_ambiguity, verify_phase_propagation
from .experiments import StabilityReport, empirical_stability, instability_witness, separation_sweep

__version__ = "0.1.0"
