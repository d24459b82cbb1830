"""Exact truncated Fock-space engine."""
from .basis import FockBasis, SectorBasis, build_fock_basis, build_sector_basis, sector_dimension
from .evolution import evolve_exact, evolve_time_dependent, expm_dense, expm_krylov
from .operators import (
    SectorOperator,
    annihilate_matrix,
    annihilation_field,
    build_hamiltonian,
    commutator_norm,
    create_matrix,
    creation_field,
    hermiticity_error,
    lowering_matrices,
    number_operator,
    pair_creation,
    quadratic_generator_matrix,
    second_quantize,
)
from .states import (
    FockVector,
    apply_annihilate,
    apply_create,
    coherent_number_stats,
    coherent_state,
    field_pair,
    limiting_evolution,
    fluctuation_evolve,
    mode_amplitudes,
    product_state,
    vacuum,
    vacuum_two_point,
    weyl_apply,
    xi_components,
    xi_normalization,
    xi_state,
)
