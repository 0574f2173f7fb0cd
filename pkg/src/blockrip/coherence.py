"""Coherence measures of an orthobasis relative to the block partition."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bases import Orthobasis

__all__ = [
    "CoherenceReport",
    "coherence",
    "block_coherence",
    "modified_coherence",
    "coherence_report",
    "reshape_column",
    "reshaped_column_norms",
    "required_measurements",
]


@dataclass(frozen=True)
class CoherenceReport:
    mu: float
    gamma: float
    mu_tilde: float
    argmax_entry: tuple[int, int]
    argmax_column: int


def _mat(U):
    return U.entries if isinstance(U, Orthobasis) else np.asarray(U)


def coherence(U: Orthobasis) -> float:
    """``sqrt(n) * max |U[p, q]|``."""
    A = _mat(U)
    return math.sqrt(A.shape[0]) * float(np.max(np.abs(A)))


def reshape_column(alpha, U: Orthobasis) -> np.ndarray:
    """Return the ``N x J`` matrix whose ``j``-th column is ``U_j @ alpha``.

    ``alpha`` may also be an ``(n_total, K)`` stack, giving ``(K, N, J)``.
    """
    alpha = np.asarray(alpha)
    n = U.n_total
    if alpha.shape[0] != n:
        raise ValueError(f"alpha has length {alpha.shape[0]}, basis needs {n}")
    J, N = U.partition.n_blocks, U.partition.block_len
    x = U.entries @ alpha
    if x.ndim == 1:
        return x.reshape(J, N).T
    return x.T.reshape(-1, J, N).transpose(0, 2, 1)


def reshaped_column_norms(U: Orthobasis) -> np.ndarray:
    """Spectral norms ``||X_R(e_n, U)||_2`` for every column ``n``."""
    J, N = U.partition.n_blocks, U.partition.block_len
    # column n of U, rows grouped by block -> (n, J, N); the spectral norm of
    # the transpose is the same, so no copy is needed
    stack = U.entries.T.reshape(-1, J, N)
    return np.linalg.svd(stack, compute_uv=False)[:, 0]


def block_coherence(U: Orthobasis) -> float:
    """``sqrt(J) * max_n ||X_R(e_n, U)||_2``."""
    return math.sqrt(U.partition.n_blocks) * float(np.max(reshaped_column_norms(U)))


def modified_coherence(U: Orthobasis) -> float:
    return min(math.sqrt(U.partition.n_blocks), coherence(U))


def coherence_report(U: Orthobasis) -> CoherenceReport:
    absU = np.abs(U.entries)
    # argmax returns the first maximum in C order: lowest (row, col) wins ties
    flat = int(np.argmax(absU))
    p, q = divmod(flat, absU.shape[1])
    mu = math.sqrt(U.n_total) * float(absU[p, q])
    norms = reshaped_column_norms(U)
    col = int(np.argmax(norms))
    gamma = math.sqrt(U.partition.n_blocks) * float(norms[col])
    return CoherenceReport(mu=mu, gamma=gamma,
                           mu_tilde=min(math.sqrt(U.partition.n_blocks), mu),
                           argmax_entry=(p, q), argmax_column=col)


def required_measurements(delta: float, S: float, n_total: float, coherence_factor: float) -> float:
    """Measurement-count index ``delta**-2 * factor**2 * S * log(S)**2 * log(n)**2``.

    The unknown absolute constant is fixed to one and logs are natural, so
    the value is only meaningful for comparing bases or operator types, not
    as a calibrated prediction. Pass the modified coherence for distinct
    blocks and the block-coherence for repeated blocks.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if S <= 1 or n_total <= 1:
        raise ValueError("S and n_total must exceed 1 for the log factors to be positive")
    return (coherence_factor / delta) ** 2 * S * math.log(S) ** 2 * math.log(n_total) ** 2
