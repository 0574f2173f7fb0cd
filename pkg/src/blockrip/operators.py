"""Block-diagonal measurement operators.

A :class:`BlockOperator` holds the diagonal blocks of a distinct (DBD) or
repeated (RBD) block-diagonal matrix and applies it block by block without
forming the full ``(J*M) x (J*N)`` matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import block_diag

from ._rng import stream
from .bases import BlockPartition

__all__ = [
    "EnsembleKind",
    "Ensemble",
    "OperatorKind",
    "BlockOperator",
    "PartialCirculant",
    "sample_block",
    "sample_operator",
    "sample_master",
    "build_dbd",
    "build_rbd",
    "apply",
    "truncate_operator",
    "partial_circulant",
    "extend_signal",
    "shift_up",
]


class EnsembleKind(str, Enum):
    GAUSSIAN = "Gaussian"
    RADEMACHER = "Rademacher"


class OperatorKind(str, Enum):
    DBD = "DBD"
    RBD = "RBD"


@dataclass(frozen=True)
class Ensemble:
    """i.i.d. mean-zero ``rows x cols`` entries with standard deviation ``scale``.

    ``scale`` defaults to ``1/sqrt(rows)``.
    """

    kind: EnsembleKind
    rows: int
    cols: int
    scale: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", EnsembleKind(self.kind))
        if self.rows < 1 or self.cols < 1:
            raise ValueError("ensemble dimensions must be positive")
        if self.scale is None:
            object.__setattr__(self, "scale", 1.0 / math.sqrt(self.rows))


def sample_block(ensemble: Ensemble, seed) -> np.ndarray:
    rng = stream(seed, "block")
    shape = (ensemble.rows, ensemble.cols)
    if ensemble.kind is EnsembleKind.GAUSSIAN:
        return ensemble.scale * rng.standard_normal(shape)
    signs = rng.integers(0, 2, size=shape) * 2.0 - 1.0
    return ensemble.scale * signs


def _as_real_block(b) -> np.ndarray:
    b = np.asarray(b)
    if np.iscomplexobj(b):
        raise TypeError("measurement blocks must be real")
    b = np.array(b, dtype=np.float64)
    if b.ndim != 2:
        raise ValueError(f"measurement blocks must be 2-D, got shape {b.shape}")
    b.flags.writeable = False
    return b


@dataclass(frozen=True, eq=False)
class BlockOperator:
    kind: OperatorKind
    blocks: tuple
    partition: BlockPartition

    def __post_init__(self):
        object.__setattr__(self, "kind", OperatorKind(self.kind))
        M, N = self.partition.meas_per_block, self.partition.block_len
        expected = self.partition.n_blocks if self.kind is OperatorKind.DBD else 1
        if len(self.blocks) != expected:
            raise ValueError(f"{self.kind.value} operator needs {expected} stored blocks, got {len(self.blocks)}")
        for b in self.blocks:
            if b.shape != (M, N):
                raise ValueError(f"block shape {b.shape} does not match ({M}, {N})")

    @property
    def shape(self) -> tuple[int, int]:
        return self.partition.meas_total, self.partition.n_total

    def block(self, j: int) -> np.ndarray:
        return self.blocks[j if self.kind is OperatorKind.DBD else 0]

    def iter_blocks(self):
        for j in range(self.partition.n_blocks):
            yield self.block(j)

    def __matmul__(self, x):
        return apply(self, x)

    def adjoint(self, y) -> np.ndarray:
        """Apply the transpose blockwise: ``x_j = Phi_j^T y_j``."""
        y = np.asarray(y)
        M, N, J = self.partition.meas_per_block, self.partition.block_len, self.partition.n_blocks
        if y.shape[0] != J * M:
            raise ValueError(f"input has length {y.shape[0]}, operator needs {J * M}")
        if self.kind is OperatorKind.RBD:
            return _rbd_matmul(self.blocks[0].T, y, J).reshape(J * N, *y.shape[1:])
        out = np.empty((J * N, *y.shape[1:]), dtype=np.result_type(y, np.float64))
        for j, b in enumerate(self.blocks):
            out[j * N : (j + 1) * N] = _real_matmul(b.T, y[j * M : (j + 1) * M])
        return out

    def dense(self) -> np.ndarray:
        """Assemble the full block-diagonal matrix."""
        return block_diag(*self.iter_blocks())

    def gram_blocks(self) -> list[np.ndarray]:
        """Diagonal blocks ``Phi_j Phi_j^T`` of ``A A^T``."""
        return [b @ b.T for b in self.iter_blocks()]


def _real_matmul(B, x):
    # a real operator acts on real and imaginary parts separately; on the
    # interleaved float view of a complex array that is a single real GEMM
    if np.iscomplexobj(x):
        xc = np.ascontiguousarray(x, dtype=np.complex128)
        xr = xc.reshape(xc.shape[0], -1).view(np.float64)
        return (B @ xr).view(np.complex128).reshape(B.shape[0], *x.shape[1:])
    return B @ x


def _rbd_matmul(B, x, J):
    # one GEMM over all blocks and columns: (rows, cols) @ (cols, J*K)
    X = x.reshape(J, B.shape[1], -1)
    K = X.shape[2]
    Xt = X.transpose(1, 0, 2).reshape(B.shape[1], J * K)
    return _real_matmul(B, Xt).reshape(B.shape[0], J, K).transpose(1, 0, 2)


def build_dbd(blocks) -> BlockOperator:
    blocks = tuple(_as_real_block(b) for b in blocks)
    if not blocks:
        raise ValueError("at least one block is required")
    shapes = {b.shape for b in blocks}
    if len(shapes) != 1:
        raise ValueError(f"ragged block list: shapes {sorted(shapes)}")
    M, N = blocks[0].shape
    return BlockOperator(OperatorKind.DBD, blocks, BlockPartition(len(blocks), N, M))


def build_rbd(block, J: int) -> BlockOperator:
    b = _as_real_block(block)
    M, N = b.shape
    return BlockOperator(OperatorKind.RBD, (b,), BlockPartition(J, N, M))


def apply(op: BlockOperator, x) -> np.ndarray:
    """``y_j = Phi_j x_j`` for every block, concatenated.

    ``x`` may be a vector of length ``J*N`` or a ``(J*N, K)`` stack of columns.
    """
    x = np.asarray(x)
    M, N, J = op.partition.meas_per_block, op.partition.block_len, op.partition.n_blocks
    if x.shape[0] != J * N:
        raise ValueError(f"input has length {x.shape[0]}, operator needs {J * N}")
    if op.kind is OperatorKind.RBD:
        return _rbd_matmul(op.blocks[0], x, J).reshape(J * M, *x.shape[1:])
    out = np.empty((J * M, *x.shape[1:]), dtype=np.result_type(x, np.float64))
    for j, b in enumerate(op.blocks):
        out[j * M : (j + 1) * M] = _real_matmul(b, x[j * N : (j + 1) * N])
    return out


def sample_operator(kind, ensemble: Ensemble, J: int, seed) -> BlockOperator:
    """DBD block ``j`` comes from stream ``(seed, j)``; RBD reuses stream ``(seed, 0)``."""
    kind = OperatorKind(kind)
    if kind is OperatorKind.RBD:
        return build_rbd(sample_block(ensemble, (seed, 0)), J)
    return build_dbd([sample_block(ensemble, (seed, j)) for j in range(J)])


def sample_master(kind, partition: BlockPartition, seed, ensemble_kind=EnsembleKind.GAUSSIAN) -> BlockOperator:
    """Square ``N x N`` blocks with unit-variance entries, for later truncation."""
    N = partition.block_len
    ens = Ensemble(ensemble_kind, N, N, scale=1.0)
    return sample_operator(kind, ens, partition.n_blocks, (seed, "master"))


def truncate_operator(master: BlockOperator, m: int) -> BlockOperator:
    """Keep the first ``m`` rows of every block and rescale them by ``1/sqrt(m)``."""
    N = master.partition.block_len
    if master.partition.meas_per_block != N:
        raise ValueError("master operator must have square blocks")
    if not 1 <= m <= N:
        raise ValueError(f"m must lie in [1, {N}], got {m}")
    s = 1.0 / math.sqrt(m)
    if master.kind is OperatorKind.RBD:
        return build_rbd(master.blocks[0][:m] * s, master.partition.n_blocks)
    return build_dbd([b[:m] * s for b in master.blocks])


@dataclass(frozen=True, eq=False)
class PartialCirculant:
    """First ``J`` rows of the circulant matrix generated by ``r``, scaled by ``1/sqrt(J)``."""

    r: np.ndarray
    rows: int

    @property
    def P(self) -> int:
        return self.r.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        P, J = self.P, self.rows
        k = np.arange(J)[:, None]
        p = np.arange(P)[None, :]
        return self.r[(p - k) % P] / math.sqrt(J)

    def __matmul__(self, x):
        return _real_matmul(self.matrix, np.asarray(x))

    def rbd_operator(self) -> BlockOperator:
        """The repeated-block operator whose single ``1 x P`` block is ``r^T``.

        Applied to ``extend_signal(x, J) / sqrt(J)`` it reproduces ``self @ x``.
        """
        return build_rbd(self.r[None, :], self.rows)


def partial_circulant(r, J: int) -> PartialCirculant:
    r = np.array(r, dtype=np.float64)
    if r.ndim != 1:
        raise ValueError("r must be a vector")
    if not 1 <= J <= r.shape[0]:
        raise ValueError(f"need 1 <= J <= P, got J={J}, P={r.shape[0]}")
    r.flags.writeable = False
    return PartialCirculant(r, int(J))


def shift_up(x, k: int = 1) -> np.ndarray:
    """Cyclic shift-up by ``k``: entry ``i`` of the result is ``x[(i + k) % P]``."""
    return np.roll(np.asarray(x), -k, axis=0)


def extend_signal(x, J: int) -> np.ndarray:
    """Stack ``[x; Sx; ...; S^(J-1) x]`` with ``S`` the cyclic shift-up."""
    x = np.asarray(x)
    if not 1 <= J <= x.shape[0]:
        raise ValueError(f"need 1 <= J <= P, got J={J}, P={x.shape[0]}")
    return np.concatenate([shift_up(x, j) for j in range(J)], axis=0)
