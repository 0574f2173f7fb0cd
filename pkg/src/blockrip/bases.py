"""Orthobases for block-partitioned signal spaces.

A signal of length ``n_total = n_blocks * block_len`` is split into
``n_blocks`` consecutive blocks. An :class:`Orthobasis` is a unitary
``n_total x n_total`` complex matrix whose row blocks ``U_j`` line up with
that partition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._rng import stream

__all__ = [
    "BlockPartition",
    "BasisLabel",
    "Orthobasis",
    "canonical_basis",
    "fourier_basis",
    "generic_basis",
    "haar_orthogonal",
    "circulant_basis",
    "permute_basis",
    "basis_by_label",
]

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class BlockPartition:
    """Dimensions of the block model: ``J`` blocks of length ``N``, ``M`` rows each.

    ``meas_per_block`` defaults to ``block_len`` when it is irrelevant (for
    instance when the partition only describes a basis).
    """

    n_blocks: int
    block_len: int
    meas_per_block: int | None = None

    def __post_init__(self):
        if self.meas_per_block is None:
            object.__setattr__(self, "meas_per_block", self.block_len)
        for name in ("n_blocks", "block_len", "meas_per_block"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def n_total(self) -> int:
        return self.n_blocks * self.block_len

    @property
    def meas_total(self) -> int:
        return self.n_blocks * self.meas_per_block

    def with_meas(self, m: int) -> "BlockPartition":
        return BlockPartition(self.n_blocks, self.block_len, m)

    @classmethod
    def from_total(cls, n_total: int, n_blocks: int, meas_per_block: int | None = None):
        if n_total % n_blocks:
            raise ValueError(f"n_total={n_total} is not a multiple of n_blocks={n_blocks}")
        return cls(n_blocks, n_total // n_blocks, meas_per_block)


class BasisLabel(str, Enum):
    CANONICAL = "Canonical"
    FOURIER = "Fourier"
    GENERIC = "Generic"
    CIRCULANT = "Circulant"
    CUSTOM = "Custom"


@dataclass(frozen=True, eq=False)
class Orthobasis:
    """Unitary matrix together with its row-block partition.

    Set ``check=False`` to skip the O(n^3) unitarity check for constructions
    that are orthonormal by design.
    """

    entries: np.ndarray
    partition: BlockPartition
    label: BasisLabel = BasisLabel.CUSTOM
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        U = np.array(self.entries, dtype=np.complex128)
        n = self.partition.n_total
        if U.shape != (n, n):
            raise ValueError(f"basis has shape {U.shape}, partition needs ({n}, {n})")
        if self.check:
            err = orthonormality_error(U)
            if err > ORTHO_TOL:
                raise ValueError(f"matrix is not unitary: max|U*U - I| = {err:.3e}")
        U.flags.writeable = False
        object.__setattr__(self, "entries", U)
        object.__setattr__(self, "label", BasisLabel(self.label))

    @property
    def n_total(self) -> int:
        return self.partition.n_total

    def block(self, j: int) -> np.ndarray:
        """Row block ``U_j`` (0-based ``j``), shape ``(N, n_total)``."""
        N = self.partition.block_len
        if not 0 <= j < self.partition.n_blocks:
            raise IndexError(f"block index {j} out of range")
        return self.entries[j * N : (j + 1) * N]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def orthonormality_error(U: np.ndarray) -> float:
    U = np.asarray(U)
    G = U.conj().T @ U
    G[np.diag_indices_from(G)] -= 1.0
    return float(np.max(np.abs(G))) if G.size else 0.0


def canonical_basis(partition: BlockPartition) -> Orthobasis:
    return Orthobasis(np.eye(partition.n_total, dtype=np.complex128), partition,
                      BasisLabel.CANONICAL, check=False)


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix ``F[p, q] = exp(-2j*pi*p*q/n) / sqrt(n)``."""
    k = np.arange(n)
    # reduce p*q mod n before scaling so large n keeps full phase accuracy
    phase = np.outer(k, k) % n
    return np.exp(-2j * np.pi * phase / n) / np.sqrt(n)


def fourier_basis(partition: BlockPartition) -> Orthobasis:
    return Orthobasis(dft_matrix(partition.n_total), partition, BasisLabel.FOURIER, check=False)


def haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a real orthogonal matrix from the Haar measure.

    QR of a Gaussian matrix, with each column of Q multiplied by the sign of
    the matching diagonal entry of R so the result is exactly Haar.
    """
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d


def generic_basis(partition: BlockPartition, seed) -> Orthobasis:
    """Haar-random real orthobasis, stored as complex. Deterministic in ``seed``."""
    Q = haar_orthogonal(partition.n_total, stream(seed, "generic_basis"))
    return Orthobasis(Q.astype(np.complex128), partition, BasisLabel.GENERIC, check=False)


def circulant_basis(P: int, J: int) -> Orthobasis:
    """Block-coherence-one basis used for partial circulant matrices.

    Starts from ``kron(F_J, I_P)`` and cyclically shifts the rows of the
    ``j``-th ``P x PJ`` row block upward ``j`` times (0-based ``j``). Each
    column reshaped into a ``P x J`` matrix then has one entry of modulus
    ``1/sqrt(J)`` per row and per column.
    """
    if P < 1 or J < 1:
        raise ValueError("P and J must be positive")
    if J > P:
        raise ValueError(f"circulant basis requires J <= P, got J={J}, P={P}")
    Tp = np.kron(dft_matrix(J), np.eye(P))
    T = np.empty_like(Tp)
    for j in range(J):
        T[j * P : (j + 1) * P] = np.roll(Tp[j * P : (j + 1) * P], -j, axis=0)
    return Orthobasis(T, BlockPartition(J, P, 1), BasisLabel.CIRCULANT, check=False)


def permute_basis(U: Orthobasis, row_perm) -> Orthobasis:
    """Return ``P_c U``: row ``i`` of the result is row ``row_perm[i]`` of ``U``."""
    perm = np.asarray(row_perm)
    n = U.n_total
    if perm.shape != (n,) or not np.issubdtype(perm.dtype, np.integer):
        raise ValueError(f"row_perm must be an integer array of length {n}")
    if not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValueError("row_perm is not a bijection on range(n_total)")
    return Orthobasis(U.entries[perm], U.partition, BasisLabel.CUSTOM, check=False)


def basis_by_label(label, partition: BlockPartition, seed=None) -> Orthobasis:
    label = BasisLabel(label)
    if label is BasisLabel.CANONICAL:
        return canonical_basis(partition)
    if label is BasisLabel.FOURIER:
        return fourier_basis(partition)
    if label is BasisLabel.GENERIC:
        return generic_basis(partition, seed)
    raise ValueError(f"no default construction for basis label {label.value}")
