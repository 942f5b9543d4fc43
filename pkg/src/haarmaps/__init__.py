"""Exact Haar-unitary matrix integrals via permutation sums and monotone
walks: moments, cumulants, genus-stratified expansion coefficients, map
enumeration, identity checks, and a Monte Carlo cross-check oracle.

Everything algebraic is exact (rationals / Gaussian rationals); floating
point enters only in the sampling oracle.
"""

from .expansion import (
    AlternationError,
    FormalCumulant,
    GenusCoefficient,
    MasterCheckResult,
    Potential,
    TutteCheckResult,
    alternated_parts,
    bound_constants,
    bounds_check,
    canonical_word_tuples,
    clear_caches,
    cumulant_haar,
    cumulants_from_moments,
    formal_cumulant,
    formal_radius,
    genus_coefficient,
    genus_partial_sum,
    genus_value,
    genus_zero_functional,
    gradient_trick_check,
    hurwitz_reduction,
    master_operator_check,
    moment_haar,
    operator_norm_bound_check,
    set_partitions,
    transport_image,
    tutte_check,
)
from .maps import (
    EmbeddedStructure,
    EnumerationBudgetError,
    MapDiagnostics,
    UnitaryTypeMap,
    build_map,
    cut_black,
    cut_white,
    diagnostics,
    embedded_structure,
    enumerate_maps,
    map_from_json,
    map_phi,
    map_to_json,
    propagate_labels,
    recover_perm_data,
    relabel_map,
    to_perm_data,
)
from .ncpoly import (
    EMPTY_WORD,
    DeterministicWordError,
    GaussianRational,
    Letter,
    NCPolynomial,
    NCWord,
    TensorPolynomial,
    TraceExpression,
    WordDecomposition,
    cyclic_derivative,
    decompose,
    evaluate_trace_expression,
    format_word,
    gamma_of_tuple,
    nc_derivative,
    parse_word,
    reduced_laplacian,
    trace_of_permutation,
    xi_norm,
)
from .oracle import (
    MatrixTuple,
    SampleReport,
    counter_uniforms,
    empirical_joint_cumulant,
    evaluate_word,
    evaluate_word_batch,
    gaussian_matrices,
    haar_sampler,
    sample_haar,
    splitmix64,
)
from .perm_core import (
    Permutation,
    SignVector,
    Transposition,
    all_permutations,
    compose,
    conjugate,
    cycle_decomposition,
    is_sign_compatible,
    pi_eps,
    sign_compatible_permutations,
    trace_restrict,
)
from .walks import (
    MonotoneWalk,
    count_monotone_walks,
    enumerate_monotone_walks,
    hurwitz_genus_to_steps,
    is_transitive,
    monotone_hurwitz_by_genus,
    monotone_triple_hurwitz,
)
from .weingarten import (
    WeingartenRegimeError,
    WeingartenTable,
    get_table,
    moment_weight,
    weingarten_exact,
    weingarten_series_partial,
)

__version__ = "0.1.0"
