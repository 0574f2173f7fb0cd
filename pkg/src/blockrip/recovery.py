"""Complex basis pursuit: ``min ||beta||_1`` subject to ``A beta = y``.

Solved with ADMM on the split ``beta = z``:

    beta <- projection of (z - u) onto {A beta = y}
    z    <- shrink(beta + u, 1/rho)
    u    <- u + beta - z

The projection uses a cached factorisation of ``A A^*``, which for a
block-diagonal ``A = Phi U`` with unitary ``U`` equals ``Phi Phi^T`` and is
therefore shared by every sparsity basis. Several right-hand sides can be
solved at once by passing ``y`` with shape ``(m, K)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ._kernels import kernels

__all__ = [
    "BpSettings",
    "RecoveryOutcome",
    "AdjointMismatch",
    "GramSolver",
    "shrink",
    "basis_pursuit",
    "basis_pursuit_dense",
    "recovery_success",
    "relative_error",
    "recovery_outcome",
]


class AdjointMismatch(ValueError):
    pass


@dataclass(frozen=True)
class BpSettings:
    penalty: float = 1.0
    tol_primal: float = 1e-6
    tol_dual: float = 1e-6
    max_iters: int = 5000
    # residual balancing: rescale rho every `adapt_every` iterations when the
    # primal and dual residuals differ by more than `adapt_ratio`, during the
    # first `adapt_until` iterations only. Later changes of rho keep undoing
    # progress on badly conditioned problems; a fixed rho always converges.
    adapt_every: int = 10
    adapt_ratio: float = 10.0
    adapt_until: int = 500

    def __post_init__(self):
        for name in ("penalty", "tol_primal", "tol_dual", "max_iters", "adapt_every", "adapt_ratio"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.adapt_until < 0:
            raise ValueError("adapt_until must be non-negative")


@dataclass(frozen=True)
class RecoveryOutcome:
    beta_hat: np.ndarray
    rel_error: float
    success: bool
    iters: int
    converged: bool = True


def shrink(z, t):
    """Complex soft threshold: ``z * max(1 - t/|z|, 0)`` entrywise."""
    if t < 0:
        raise ValueError("threshold must be non-negative")
    return kernels.shrink(z, t)


class GramSolver:
    """Solve ``(A A^*) w = r`` with a Cholesky factor, or a pseudo-inverse if singular."""

    def __init__(self, gram):
        G = np.asarray(gram)
        G = 0.5 * (G + G.conj().T)
        self.size = G.shape[0]
        try:
            self._cho = sla.cho_factor(G, lower=True, check_finite=True)
            self._pinv = None
        except np.linalg.LinAlgError:
            self._cho = None
            self._pinv = sla.pinvh(G)

    @classmethod
    def from_blocks(cls, blocks):
        """Gram given by its diagonal blocks (``Phi_j Phi_j^T``)."""
        return cls(sla.block_diag(*blocks))

    def solve(self, r):
        if self._cho is not None:
            return sla.cho_solve(self._cho, r, check_finite=False)
        return self._pinv @ r


def _check_adjoint(measure, adjoint, n, m, K, rng, tol=1e-8):
    x = rng.standard_normal((n, K)) + 1j * rng.standard_normal((n, K))
    w = rng.standard_normal((m, K)) + 1j * rng.standard_normal((m, K))
    Ax = measure(x)
    Aw = adjoint(w)
    lhs = np.einsum("ik,ik->k", Ax.conj(), w)
    rhs = np.einsum("ik,ik->k", x.conj(), Aw)
    scale = np.linalg.norm(Ax, axis=0) * np.linalg.norm(w, axis=0) + np.linalg.norm(x, axis=0) * np.linalg.norm(Aw, axis=0)
    gap = np.abs(lhs - rhs) / np.maximum(scale, 1e-300)
    if np.any(gap > tol):
        raise AdjointMismatch(f"measure and adjoint are not adjoint (relative gap {gap.max():.2e})")


def _admm(project, beta, settings, k):
    """ADMM loop on columns of ``beta`` (already normalised, in the feasible set).

    ``project(v, cols)`` maps ``v`` onto the affine set of the problems in
    ``cols``. Converged columns are frozen and dropped from the batch, so the
    cost of a hard column does not slow down the easy ones.
    """
    n, K = beta.shape
    out = beta.copy()
    iters = np.zeros(K, dtype=int)
    converged = np.zeros(K, dtype=bool)
    r_out = np.zeros(K)
    s_out = np.zeros(K)
    active = np.arange(K)
    z = beta.copy()
    u = np.zeros_like(beta)
    rho = np.full(K, float(settings.penalty))
    for it in range(1, settings.max_iters + 1):
        beta = np.ascontiguousarray(project(z - u, active))
        st = k.admm_shrink_update(beta, z, u, 1.0 / rho)
        r = np.sqrt(st[0])
        s = rho * np.sqrt(st[1])
        eps_pri = settings.tol_primal * np.maximum(np.sqrt(np.maximum(st[2], st[3])), 1e-12)
        eps_dual = settings.tol_dual * np.maximum(rho * np.sqrt(st[4]), 1e-12)
        done = (r <= eps_pri) & (s <= eps_dual)
        if it == settings.max_iters:
            done[:] = True
        if done.any():
            cols = active[done]
            out[:, cols] = beta[:, done]
            iters[cols] = it
            converged[cols] = (r <= eps_pri)[done] & (s <= eps_dual)[done]
            r_out[cols], s_out[cols] = r[done], s[done]
            keep = ~done
            active = active[keep]
            if active.size == 0:
                break
            z = np.ascontiguousarray(z[:, keep])
            u = np.ascontiguousarray(u[:, keep])
            rho = rho[keep]
        if it <= settings.adapt_until and it % settings.adapt_every == 0:
            up = r[~done] > settings.adapt_ratio * s[~done]
            down = s[~done] > settings.adapt_ratio * r[~done]
            rho[up] *= 2.0
            u[:, up] /= 2.0
            rho[down] /= 2.0
            u[:, down] *= 2.0
    return out, iters, converged, r_out, s_out


def _finish(beta, scale, live, vector, iters, converged, r, s, full_output):
    converged = converged | ~live
    beta[:, ~live] = 0.0
    beta *= scale
    out = beta[:, 0] if vector else beta
    if not full_output:
        return out
    info = {
        "iters": int(iters.max(initial=0)),
        "iters_per_column": iters,
        "converged": bool(converged[0]) if vector else converged,
        "primal_residual": r * scale,
        "dual_residual": s * scale,
    }
    return out, info


def _normalise(beta):
    # the least-norm point's norm sets the scale so the iteration is scale-free
    scale = np.linalg.norm(beta, axis=0)
    live = scale > 0
    scale[~live] = 1.0
    return beta / scale, scale, live


def basis_pursuit(measure, adjoint, y, settings: BpSettings | None = None, gram=None,
                  check_adjoint: bool = True, full_output: bool = False, backend=None):
    """Solve ``min ||beta||_1 s.t. measure(beta) = y``.

    Parameters
    ----------
    measure, adjoint : callable
        Mutually adjoint linear maps acting on 2-D arrays whose columns are
        independent vectors (``(n, K) -> (m, K)`` and back). The same map
        must be applied to every column; use :func:`basis_pursuit_dense` for
        a different operator per column.
    y : array, shape (m,) or (m, K)
        Measurements. Each column is solved as a separate problem.
    settings : BpSettings, optional
    gram : array or GramSolver, optional
        ``A A^*``. Built from ``m`` applications of ``measure(adjoint(.))``
        when omitted.
    full_output : bool
        Also return a dict with ``iters`` (maximum over columns),
        ``iters_per_column``, ``converged`` (per column), ``primal_residual``
        and ``dual_residual``.

    Returns
    -------
    beta : array, shape (n,) or (n, K)
        The final projected iterate, which satisfies ``measure(beta) = y``
        to working precision. Non-convergence is reported through
        ``full_output``, never raised.
    """
    settings = BpSettings() if settings is None else settings
    k = kernels if backend is None else backend
    y = np.asarray(y)
    vector = y.ndim == 1
    Y = np.array(y.reshape(y.shape[0], -1), dtype=np.complex128)
    m, K = Y.shape
    n = adjoint(np.zeros((m, 1), dtype=np.complex128)).shape[0]

    if check_adjoint:
        _check_adjoint(measure, adjoint, n, m, K, np.random.default_rng(0))
    if gram is None:
        gram = measure(adjoint(np.eye(m, dtype=np.complex128)))
    solver = gram if isinstance(gram, GramSolver) else GramSolver(gram)

    beta, scale, live = _normalise(np.ascontiguousarray(adjoint(solver.solve(Y))))
    Y /= scale

    def project(v, cols):
        return v - adjoint(solver.solve(measure(v) - Y[:, cols]))

    beta, iters, conv, r, s = _admm(project, beta, settings, k)
    return _finish(beta, scale, live, vector, iters, conv, r, s, full_output)


def basis_pursuit_dense(A, y, settings: BpSettings | None = None, full_output: bool = False,
                        backend=None):
    """Basis pursuit for explicit matrices, with the affine projector precomputed.

    Parameters
    ----------
    A : array, shape (m, n) or (K, m, n)
        One operator shared by all columns, or one operator per column.
        Rows must be linearly independent.
    y : array, shape (m,) or (m, K)

    Returns the same values as :func:`basis_pursuit`.
    """
    settings = BpSettings() if settings is None else settings
    k = kernels if backend is None else backend
    A = np.asarray(A, dtype=np.complex128)
    y = np.asarray(y)
    vector = y.ndim == 1
    Y = np.array(y.reshape(y.shape[0], -1), dtype=np.complex128)
    m, K = Y.shape
    if A.shape[-2] != m or (A.ndim == 3 and A.shape[0] != K) or A.ndim not in (2, 3):
        raise ValueError(f"operator shape {A.shape} does not match measurements {Y.shape}")
    n = A.shape[-1]
    AH = np.conj(np.swapaxes(A, -1, -2))
    # pseudo-inverse A^* (A A^*)^{-1} via a solve against the Hermitian gram
    W = np.swapaxes(np.linalg.solve(A @ AH, A), -1, -2).conj()
    P = np.eye(n) - W @ A
    if A.ndim == 2:
        beta = W @ Y
    else:
        beta = np.matmul(W, Y.T[:, :, None])[:, :, 0].T
    beta, scale, live = _normalise(np.ascontiguousarray(beta))
    shift = beta.copy()

    if A.ndim == 2:
        def project(v, cols):
            return P @ v + shift[:, cols]
    else:
        def project(v, cols):
            return np.matmul(P[cols], v.T[:, :, None])[:, :, 0].T + shift[:, cols]

    beta, iters, conv, r, s = _admm(project, beta, settings, k)
    return _finish(beta, scale, live, vector, iters, conv, r, s, full_output)


def relative_error(beta, beta_hat) -> float:
    beta = np.asarray(beta)
    nb = np.linalg.norm(beta)
    if nb == 0:
        raise ValueError("reference signal is zero; relative error is undefined")
    return float(np.linalg.norm(np.asarray(beta_hat) - beta) / nb)


def recovery_success(beta, beta_hat, threshold: float = 1e-2) -> bool:
    return relative_error(beta, beta_hat) < threshold


def recovery_outcome(beta, beta_hat, iters: int, converged: bool = True,
                     threshold: float = 1e-2) -> RecoveryOutcome:
    """Score one reconstruction: ``success`` iff the relative error is below ``threshold``."""
    err = relative_error(beta, beta_hat)
    return RecoveryOutcome(np.asarray(beta_hat), err, bool(err < threshold), int(iters), bool(converged))
