"""Multi-soliton solutions of non-abelian loop Toda equations by rational dressing."""

from .blockalg import (BlockMatrix, BlockStructure, GradedPair,
                       apply_automorphism, build_canonical_c, build_h,
                       commutator_check, root_of_unity)
from .dressing import (DressedSolution, EvolvedVectors, InitialData, PoleData,
                       assemble_psi_pair, cyclotomic_identity, evolve_vectors,
                       gamma_pair, p_q_matrices, r_tilde)
from .solitons import (ClosedFormSolution, IdempotentFamily, SolitonSpec,
                       TauPair, delta_matrix_X, dressing_factor_h,
                       interaction_eta, multi_soliton_tau_pair, one_soliton,
                       soliton_gamma_pair)
from .spectral import (SpectralData, SpectrumSummary, canonical_theta,
                       eigen_psi, null_basis, spectrum_multiplicities)
from .verify import (GridSpec, ResidualReport, TrivialSolution,
                     abelian_reduction_check, apply_symmetry,
                     cross_construction_check, det_factorization_check,
                     inverse_consistency_check, oracle_evolution,
                     toda_residual)

__version__ = "0.1.0"

__all__ = [
    "BlockMatrix", "BlockStructure", "GradedPair", "apply_automorphism",
    "build_canonical_c", "build_h", "commutator_check", "root_of_unity",
    "SpectralData", "SpectrumSummary", "canonical_theta", "eigen_psi",
    "null_basis", "spectrum_multiplicities",
    "DressedSolution", "EvolvedVectors", "InitialData", "PoleData",
    "assemble_psi_pair", "cyclotomic_identity", "evolve_vectors", "gamma_pair",
    "p_q_matrices", "r_tilde",
    "ClosedFormSolution", "IdempotentFamily", "SolitonSpec", "TauPair",
    "delta_matrix_X", "dressing_factor_h", "interaction_eta",
    "multi_soliton_tau_pair", "one_soliton", "soliton_gamma_pair",
    "GridSpec", "ResidualReport", "TrivialSolution", "abelian_reduction_check",
    "apply_symmetry", "cross_construction_check", "det_factorization_check",
    "inverse_consistency_check", "oracle_evolution", "toda_residual",
    "__version__",
]
