"""NumPy implementations of the hot kernels.

Same signatures and semantics as the compiled ``_ckernels`` module; used when
the extension is not built or ``BLOCKRIP_BACKEND=python`` is set.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

NAME = "python"

_CHUNK = 8192


def shrink(w, t):
    """Complex soft threshold ``w * max(1 - t/|w|, 0)``, entrywise."""
    w = np.asarray(w, dtype=np.complex128)
    a = np.abs(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(a > t, 1.0 - t / np.where(a > 0, a, 1.0), 0.0)
    return w * scale


def admm_shrink_update(beta, z, u, thresh):
    """One fused z/u step of basis-pursuit ADMM, in place.

    ``z <- shrink(beta + u, thresh[k])`` column-wise, then ``u <- u + beta - z``.
    Returns a ``(5, K)`` array of per-column squared norms:
    ``||beta - z||^2``, ``||z - z_old||^2``, ``||beta||^2``, ``||z||^2``, ``||u||^2``.
    """
    w = beta + u
    a = np.abs(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(a > thresh, 1.0 - thresh / np.where(a > 0, a, 1.0), 0.0)
    znew = w * scale
    stats = np.empty((5, beta.shape[1]))
    stats[1] = _sq(znew - z)
    z[...] = znew
    r = beta - z
    u += r
    stats[0] = _sq(r)
    stats[2] = _sq(beta)
    stats[3] = _sq(z)
    stats[4] = _sq(u)
    return stats


def _sq(x):
    return np.einsum("ij,ij->j", x.real, x.real) + np.einsum("ij,ij->j", x.imag, x.imag)


def ric_enumerate(G, S: int):
    """Scan all size-``S`` supports of the Hermitian Gram ``G`` in lexicographic order.

    Returns ``(delta, lam_min, lam_max, support)`` for the first support that
    attains the largest ``max(lam_max - 1, 1 - lam_min)``.
    """
    G = np.asarray(G, dtype=np.complex128)
    n = G.shape[0]
    if not 1 <= S <= n:
        raise ValueError(f"need 1 <= S <= {n}, got {S}")
    best = (-math.inf, 0.0, 0.0, None)
    combos = itertools.combinations(range(n), S)
    while True:
        chunk = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)),
                            dtype=np.intp)
        if chunk.size == 0:
            break
        idx = chunk.reshape(-1, S)
        sub = G[idx[:, :, None], idx[:, None, :]]
        lam = np.linalg.eigvalsh(sub)
        lo, hi = lam[:, 0], lam[:, -1]
        dev = np.maximum(hi - 1.0, 1.0 - lo)
        k = int(np.argmax(dev))
        if dev[k] > best[0]:
            best = (float(dev[k]), float(lo[k]), float(hi[k]), idx[k].copy())
    return best
