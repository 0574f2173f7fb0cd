# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. See ``_pykernels`` for the reference semantics."""

import numpy as np

from libc.math cimport sqrt, hypot, INFINITY
from libc.stdlib cimport malloc, free
from scipy.linalg.cython_lapack cimport zheev

NAME = "cython"


def shrink(w, t):
    cdef double complex[::1] wv = np.ascontiguousarray(np.ravel(w), dtype=np.complex128)
    out = np.empty(wv.shape[0], dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double tt = t
    cdef Py_ssize_t i
    cdef double a, s
    with nogil:
        for i in range(wv.shape[0]):
            a = hypot(wv[i].real, wv[i].imag)
            if a > tt:
                s = 1.0 - tt / a
                ov[i] = wv[i] * s
            else:
                ov[i] = 0.0
    return out.reshape(np.shape(w))


def admm_shrink_update(double complex[:, ::1] beta, double complex[:, ::1] z,
                       double complex[:, ::1] u, double[::1] thresh):
    cdef Py_ssize_t n = beta.shape[0]
    cdef Py_ssize_t K = beta.shape[1]
    cdef Py_ssize_t i, k
    stats = np.zeros((5, K))
    cdef double[:, ::1] st = stats
    # per-column accumulators, laid out [k][5] so the inner loop stays in cache
    acc_arr = np.zeros((K, 5))
    cdef double[:, ::1] acc = acc_arr
    cdef double wr, wi, a2, s, t, zr, zi, br, bi, rr, ri, ur, ui
    with nogil:
        for i in range(n):
            for k in range(K):
                br = beta[i, k].real
                bi = beta[i, k].imag
                ur = u[i, k].real
                ui = u[i, k].imag
                wr = br + ur
                wi = bi + ui
                a2 = wr * wr + wi * wi
                t = thresh[k]
                if a2 > t * t:
                    s = 1.0 - t / sqrt(a2)
                    zr = wr * s
                    zi = wi * s
                else:
                    zr = 0.0
                    zi = 0.0
                rr = zr - z[i, k].real
                ri = zi - z[i, k].imag
                acc[k, 1] += rr * rr + ri * ri
                z[i, k].real = zr
                z[i, k].imag = zi
                rr = br - zr
                ri = bi - zi
                acc[k, 0] += rr * rr + ri * ri
                ur = ur + rr
                ui = ui + ri
                u[i, k].real = ur
                u[i, k].imag = ui
                acc[k, 2] += br * br + bi * bi
                acc[k, 3] += zr * zr + zi * zi
                acc[k, 4] += ur * ur + ui * ui
        for k in range(K):
            for i in range(5):
                st[i, k] = acc[k, i]
    return stats


cdef struct Workspace:
    double complex* a      # S x S column-major copy of the Gram submatrix
    double* w              # eigenvalues
    double complex* work
    double* rwork
    int lwork


cdef void _support_extremes(const double complex[:, ::1] G, Py_ssize_t* idx, int S,
                            Workspace* ws, double* lo, double* hi) noexcept nogil:
    cdef int a, b, info = 0
    cdef double h, d
    cdef double complex g
    cdef char jobz = b'N'
    cdef char uplo = b'L'
    if S == 1:
        lo[0] = G[idx[0], idx[0]].real
        hi[0] = lo[0]
        return
    if S == 2:
        g = G[idx[0], idx[1]]
        h = 0.5 * (G[idx[0], idx[0]].real + G[idx[1], idx[1]].real)
        d = 0.5 * (G[idx[0], idx[0]].real - G[idx[1], idx[1]].real)
        d = sqrt(d * d + g.real * g.real + g.imag * g.imag)
        lo[0] = h - d
        hi[0] = h + d
        return
    # lower triangle is enough for LAPACK's Hermitian solver
    for b in range(S):
        for a in range(b, S):
            ws.a[b * S + a] = G[idx[a], idx[b]]
    zheev(&jobz, &uplo, &S, ws.a, &S, ws.w, ws.work, &ws.lwork, ws.rwork, &info)
    lo[0] = ws.w[0]
    hi[0] = ws.w[S - 1]


def ric_enumerate(G, Py_ssize_t S):
    cdef double complex[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.complex128)
    cdef Py_ssize_t n = Gv.shape[0]
    if not 1 <= S <= n:
        raise ValueError(f"need 1 <= S <= {n}, got {S}")
    cdef Workspace ws
    ws.lwork = 64 * S
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(S * sizeof(Py_ssize_t))
    cdef Py_ssize_t* best_idx = <Py_ssize_t*> malloc(S * sizeof(Py_ssize_t))
    ws.a = <double complex*> malloc(S * S * sizeof(double complex))
    ws.w = <double*> malloc(S * sizeof(double))
    ws.work = <double complex*> malloc(ws.lwork * sizeof(double complex))
    ws.rwork = <double*> malloc(3 * S * sizeof(double))
    if idx == NULL or best_idx == NULL or ws.a == NULL or ws.w == NULL or ws.work == NULL or ws.rwork == NULL:
        free(idx); free(best_idx); free(ws.a); free(ws.w); free(ws.work); free(ws.rwork)
        raise MemoryError()
    cdef Py_ssize_t i, pos
    cdef int s_int = <int> S
    cdef double lo = 0.0, hi = 0.0, dev, best = -INFINITY, best_lo = 0.0, best_hi = 0.0
    try:
        with nogil:
            for i in range(S):
                idx[i] = i
            while True:
                _support_extremes(Gv, idx, s_int, &ws, &lo, &hi)
                dev = hi - 1.0
                if 1.0 - lo > dev:
                    dev = 1.0 - lo
                if dev > best:
                    best = dev
                    best_lo = lo
                    best_hi = hi
                    for i in range(S):
                        best_idx[i] = idx[i]
                # next combination in lexicographic order
                pos = S - 1
                while pos >= 0 and idx[pos] == n - S + pos:
                    pos -= 1
                if pos < 0:
                    break
                idx[pos] += 1
                for i in range(pos + 1, S):
                    idx[i] = idx[i - 1] + 1
        support = np.array([best_idx[i] for i in range(S)], dtype=np.intp)
    finally:
        free(idx)
        free(best_idx)
        free(ws.a)
        free(ws.w)
        free(ws.work)
        free(ws.rwork)
    return best, best_lo, best_hi, support
