"""Restricted isometry constants in a sparsity basis.

For a support ``T`` the extreme values of ``||A U alpha||^2`` over unit
``alpha`` supported on ``T`` are the extreme eigenvalues of the ``|T| x |T|``
Gram matrix of ``A U_T``. The RIC of order ``S`` is the largest deviation of
those eigenvalues from one over all supports of size ``S``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import kernels
from ._rng import stream
from .bases import Orthobasis
from .operators import BlockOperator

__all__ = [
    "RicEstimate",
    "EnumerationCapExceeded",
    "DEFAULT_ENUMERATION_CAP",
    "support_extremes",
    "exact_ric",
    "monte_carlo_ric",
    "effective_matrix",
]

DEFAULT_ENUMERATION_CAP = 10**6


class EnumerationCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class RicEstimate:
    delta: float
    worst_support: tuple[int, ...]
    lambda_min: float
    lambda_max: float
    exact: bool


def effective_matrix(A, U) -> np.ndarray:
    """Dense ``A @ U`` for a dense matrix or a :class:`BlockOperator`."""
    Um = U.entries if isinstance(U, Orthobasis) else np.asarray(U)
    if isinstance(A, BlockOperator):
        return A @ Um
    return np.asarray(A) @ Um


def support_extremes(A, U, T) -> tuple[float, float]:
    T = np.asarray(T, dtype=np.intp).ravel()
    if T.size == 0:
        raise ValueError("support must be non-empty")
    Um = U.entries if isinstance(U, Orthobasis) else np.asarray(U)
    B = effective_matrix(A, Um[:, T])
    lam = np.linalg.eigvalsh(B.conj().T @ B)
    return float(lam[0]), float(lam[-1])


def exact_ric(A, U, S: int, enumeration_cap: int = DEFAULT_ENUMERATION_CAP, backend=None) -> RicEstimate:
    """Enumerate every support of size ``S``.

    Raises :class:`EnumerationCapExceeded` when ``C(n, S)`` is larger than
    ``enumeration_cap``; use :func:`monte_carlo_ric` for a lower bound then.
    """
    B = effective_matrix(A, U)
    n = B.shape[1]
    count = math.comb(n, S)
    if count > enumeration_cap:
        raise EnumerationCapExceeded(
            f"C({n}, {S}) = {count} supports exceeds the enumeration cap {enumeration_cap}; "
            "use monte_carlo_ric for a lower bound instead")
    G = B.conj().T @ B
    k = kernels if backend is None else backend
    delta, lo, hi, support = k.ric_enumerate(np.ascontiguousarray(G), S)
    return RicEstimate(max(float(delta), 0.0), tuple(int(i) for i in support), float(lo), float(hi), True)


def _random_supports(rng: np.random.Generator, n: int, S: int, count: int) -> np.ndarray:
    # row-major draws keep the sequence of supports a prefix-stable stream
    keys = rng.random((count, n))
    return np.sort(np.argpartition(keys, S - 1, axis=1)[:, :S], axis=1)


def monte_carlo_ric(A, U, S: int, n_trials: int, seed, chunk: int = 4096) -> RicEstimate:
    """Lower bound on the RIC from ``n_trials`` uniformly drawn supports."""
    B = effective_matrix(A, U)
    n = B.shape[1]
    if not 1 <= S <= n:
        raise ValueError(f"need 1 <= S <= {n}, got {S}")
    G = B.conj().T @ B
    rng = stream(seed, "monte_carlo_ric")
    best = (-math.inf, 0.0, 0.0, ())
    done = 0
    while done < n_trials:
        c = min(chunk, n_trials - done)
        idx = _random_supports(rng, n, S, c)
        lam = np.linalg.eigvalsh(G[idx[:, :, None], idx[:, None, :]])
        dev = np.maximum(lam[:, -1] - 1.0, 1.0 - lam[:, 0])
        k = int(np.argmax(dev))
        if dev[k] > best[0]:
            best = (float(dev[k]), float(lam[k, 0]), float(lam[k, -1]), tuple(int(i) for i in idx[k]))
        done += c
    if n_trials <= 0:
        return RicEstimate(0.0, (), 1.0, 1.0, False)
    return RicEstimate(max(best[0], 0.0), best[3], best[1], best[2], False)
