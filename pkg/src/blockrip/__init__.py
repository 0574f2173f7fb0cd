"""Block-diagonal compressive sensing toolkit.

Orthobasis constructions and coherence measures, distinct/repeated
block-diagonal measurement operators, exact and sampled restricted isometry
constants, complex basis pursuit, and the phase-transition experiment
harness behind the ``blockrip`` command.
"""

from ._kernels import BACKEND
from .bases import (BasisLabel, BlockPartition, Orthobasis, canonical_basis, circulant_basis,
                    fourier_basis, generic_basis, permute_basis)
from .chaos import (ChaosMap, SparseUnitVector, chaos_equivalence_dbd, chaos_equivalence_rbd,
                    d_quantities, norm_AD, norm_AR, sample_sparse_unit)
from .coherence import (CoherenceReport, block_coherence, coherence, coherence_report,
                        modified_coherence, required_measurements, reshape_column)
from .operators import (BlockOperator, Ensemble, EnsembleKind, OperatorKind, PartialCirculant, apply,
                        build_dbd, build_rbd, extend_signal, partial_circulant, sample_block,
                        truncate_operator)
from .recovery import (BpSettings, RecoveryOutcome, basis_pursuit, basis_pursuit_dense, recovery_success,
                       shrink)
from .ric import RicEstimate, exact_ric, monte_carlo_ric, support_extremes

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BasisLabel",
    "BlockPartition",
    "Orthobasis",
    "canonical_basis",
    "circulant_basis",
    "fourier_basis",
    "generic_basis",
    "permute_basis",
    "ChaosMap",
    "SparseUnitVector",
    "chaos_equivalence_dbd",
    "chaos_equivalence_rbd",
    "d_quantities",
    "norm_AD",
    "norm_AR",
    "sample_sparse_unit",
    "CoherenceReport",
    "block_coherence",
    "coherence",
    "coherence_report",
    "modified_coherence",
    "required_measurements",
    "reshape_column",
    "BlockOperator",
    "Ensemble",
    "EnsembleKind",
    "OperatorKind",
    "PartialCirculant",
    "apply",
    "build_dbd",
    "build_rbd",
    "extend_signal",
    "partial_circulant",
    "sample_block",
    "truncate_operator",
    "BpSettings",
    "RecoveryOutcome",
    "basis_pursuit",
    "basis_pursuit_dense",
    "recovery_success",
    "shrink",
    "RicEstimate",
    "exact_ric",
    "monte_carlo_ric",
    "support_extremes",
]
