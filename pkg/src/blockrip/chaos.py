"""Quadratic-form (chaos) view of block-diagonal measurements.

For a coefficient vector ``alpha`` the measurement energy
``||Phi U alpha||^2`` equals ``||A(alpha) xi||^2``, where ``A`` is linear in
``alpha`` and ``xi`` stacks the random matrix entries. The maps are never materialised; their
norms have closed forms:

* distinct blocks:  ``||A_D(alpha)||_2 = max_j ||U_j alpha||_2 / sqrt(M)``
* repeated block:   ``||A_R(alpha)||_2 = ||X_R(alpha, U)||_2 / sqrt(M)``

and both Frobenius norms equal ``||alpha||_2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import stream
from .bases import BlockPartition, Orthobasis
from .coherence import block_coherence, modified_coherence, reshape_column
from .operators import OperatorKind, apply, build_dbd, build_rbd

__all__ = [
    "ChaosMap",
    "SparseUnitVector",
    "norm_AD",
    "norm_AR",
    "chaos_equivalence_dbd",
    "chaos_equivalence_rbd",
    "d_quantities",
    "sample_sparse_unit",
]


def _check(alpha, U: Orthobasis, partition: BlockPartition | None):
    alpha = np.asarray(alpha)
    if alpha.shape != (U.n_total,):
        raise ValueError(f"alpha has shape {alpha.shape}, basis needs ({U.n_total},)")
    partition = U.partition if partition is None else partition
    if (partition.n_blocks, partition.block_len) != (U.partition.n_blocks, U.partition.block_len):
        raise ValueError("partition does not match the basis block structure")
    return alpha, partition


def norm_AD(alpha, U: Orthobasis, partition: BlockPartition | None = None) -> float:
    alpha, partition = _check(alpha, U, partition)
    x = (U.entries @ alpha).reshape(partition.n_blocks, partition.block_len)
    return float(np.max(np.linalg.norm(x, axis=1))) / math.sqrt(partition.meas_per_block)


def norm_AR(alpha, U: Orthobasis, partition: BlockPartition | None = None) -> float:
    alpha, partition = _check(alpha, U, partition)
    return float(np.linalg.norm(reshape_column(alpha, U), 2)) / math.sqrt(partition.meas_per_block)


@dataclass(frozen=True, eq=False)
class ChaosMap:
    """Matrix-free ``A_D(alpha)`` or ``A_R(alpha)``.

    ``apply(xi)`` takes the stacked entries of the random blocks: for DBD a
    vector of length ``J*M*N`` holding the rows of ``Phi_1, ..., Phi_J``; for
    RBD a vector of length ``M*N`` holding the rows of ``Phi``. Entries are
    expected to have unit variance (the ``1/sqrt(M)`` scale lives in the map).
    """

    variant: OperatorKind
    alpha: np.ndarray
    basis: Orthobasis
    partition: BlockPartition

    def __post_init__(self):
        object.__setattr__(self, "variant", OperatorKind(self.variant))
        alpha, _ = _check(self.alpha, self.basis, self.partition)
        object.__setattr__(self, "alpha", alpha)

    @property
    def shape(self) -> tuple[int, int]:
        J, M, N = self.partition.n_blocks, self.partition.meas_per_block, self.partition.block_len
        if self.variant is OperatorKind.DBD:
            return J * M, J * M * N
        return M * J, M * N

    def spectral_norm(self) -> float:
        if self.variant is OperatorKind.DBD:
            return norm_AD(self.alpha, self.basis, self.partition)
        return norm_AR(self.alpha, self.basis, self.partition)

    def frobenius_norm(self) -> float:
        if self.variant is OperatorKind.DBD:
            x = self.basis.entries @ self.alpha
            return float(np.linalg.norm(x))
        return float(np.linalg.norm(reshape_column(self.alpha, self.basis)))

    def apply(self, xi) -> np.ndarray:
        J, M, N = self.partition.n_blocks, self.partition.meas_per_block, self.partition.block_len
        xi = np.asarray(xi)
        XR = reshape_column(self.alpha, self.basis)
        s = 1.0 / math.sqrt(M)
        if self.variant is OperatorKind.DBD:
            rows = xi.reshape(J, M, N)
            # block j: [x_j^* xi_{j,m}]_m
            return s * np.einsum("jmn,nj->jm", rows, XR.conj()).reshape(J * M)
        rows = xi.reshape(M, N)
        # copy m: X_R^* xi'_m
        return s * (rows @ XR.conj()).reshape(M * J)


def chaos_equivalence_dbd(blocks, alpha, U: Orthobasis) -> tuple[float, float]:
    """Return ``(||Phi_D U alpha||^2, sum_j ||X_{D,j}(alpha) vec(Phi_j^*)||^2)``.

    The two numbers are equal for every realisation of the blocks.
    """
    op = build_dbd(blocks)
    alpha, partition = _check(alpha, U, op.partition)
    lhs = float(np.linalg.norm(apply(op, U.entries @ alpha)) ** 2)
    XR = reshape_column(alpha, U)
    rhs = 0.0
    for j, b in enumerate(op.blocks):
        # vec() stacks the columns of Phi_j^* = the rows of Phi_j
        v = b.conj().T.reshape(-1, order="F")
        XDj = np.kron(np.eye(partition.meas_per_block), XR[:, j].conj()[None, :])
        rhs += float(np.linalg.norm(XDj @ v) ** 2)
    return lhs, rhs


def chaos_equivalence_rbd(block, alpha, U: Orthobasis) -> tuple[float, float]:
    """Return ``(||Phi_R U alpha||^2, ||X_R(alpha)^* Phi^*||_F^2)``."""
    op = build_rbd(block, U.partition.n_blocks)
    alpha, _ = _check(alpha, U, op.partition)
    lhs = float(np.linalg.norm(apply(op, U.entries @ alpha)) ** 2)
    XR = reshape_column(alpha, U)
    rhs = float(np.linalg.norm(XR.conj().T @ op.blocks[0].conj().T, "fro") ** 2)
    return lhs, rhs


@dataclass(frozen=True)
class SparseUnitVector:
    coeffs: np.ndarray
    support: np.ndarray


def sample_sparse_unit(n_total: int, S: int, seed, coeff_dist: str = "complex_normal") -> SparseUnitVector:
    """Uniform support of size ``S``, random nonzeros, unit l2 norm."""
    if not 0 <= S <= n_total:
        raise ValueError(f"need 0 <= S <= n_total, got S={S}, n_total={n_total}")
    rng = stream(seed, "sparse_unit")
    support = np.sort(rng.choice(n_total, size=S, replace=False))
    vals = _draw_coeffs(rng, S, coeff_dist)
    coeffs = np.zeros(n_total, dtype=np.complex128)
    if S:
        coeffs[support] = vals / np.linalg.norm(vals)
    return SparseUnitVector(coeffs, support)


def _draw_coeffs(rng: np.random.Generator, S: int, coeff_dist: str) -> np.ndarray:
    if coeff_dist == "complex_normal":
        return (rng.standard_normal(S) + 1j * rng.standard_normal(S)) / math.sqrt(2.0)
    if coeff_dist == "normal":
        return rng.standard_normal(S).astype(np.complex128)
    if coeff_dist == "rademacher":
        return (rng.integers(0, 2, size=S) * 2.0 - 1.0).astype(np.complex128)
    raise ValueError(f"unknown coefficient distribution {coeff_dist!r}")


def d_quantities(variant, U: Orthobasis, S: int, n_samples: int, seed,
                 partition: BlockPartition | None = None) -> tuple[float, float, float]:
    """Empirical ``(d_F, d_2)`` over sampled unit ``S``-sparse vectors, plus the ``d_2`` bound.

    The bound is ``mu_tilde * sqrt(S / M_total)`` for distinct blocks and
    ``gamma * sqrt(S / M_total)`` for a repeated block.
    """
    variant = OperatorKind(variant)
    partition = U.partition if partition is None else partition
    if not 1 <= S <= U.n_total:
        raise ValueError(f"need 1 <= S <= n_total, got {S}")
    dF = d2 = 0.0
    for i in range(n_samples):
        a = sample_sparse_unit(U.n_total, S, (seed, i)).coeffs
        cm = ChaosMap(variant, a, U, partition)
        dF = max(dF, cm.frobenius_norm())
        d2 = max(d2, cm.spectral_norm())
    factor = modified_coherence(U) if variant is OperatorKind.DBD else block_coherence(U)
    return dF, d2, factor * math.sqrt(S / partition.meas_total)
