# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for block Gram accumulation, batched exclusion
regressions and the VAR-GARCH recursion.

Each routine matches its counterpart in ``_fallback.py`` operation for
operation, including summation order. Compile without FMA contraction.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF PIVOT_RTOL = 1e-12
DEF RESID_RTOL = 1e-12
DEF N_MOMENTS = 5


def block_grams(Z, Py_ssize_t ell):
    cdef double[:, ::1] z = np.ascontiguousarray(Z, dtype=np.float64)
    cdef Py_ssize_t T = z.shape[0], p = z.shape[1]
    cdef Py_ssize_t q = T - ell + 1
    H_arr = np.empty((q, p, p))
    cdef double[:, :, ::1] H = H_arr
    cdef Py_ssize_t j, k, a, b
    cdef double acc
    with nogil:
        for j in range(q):
            for a in range(p):
                for b in range(a, p):
                    acc = z[j, a] * z[j, b]
                    for k in range(1, ell):
                        acc = acc + z[j + k, a] * z[j + k, b]
                    H[j, a, b] = acc
                    H[j, b, a] = acc
    return H_arr


def accumulate_grams(H_in, starts_in, double scale):
    cdef double[:, :, ::1] H = np.ascontiguousarray(H_in, dtype=np.float64)
    cdef cnp.int64_t[:, ::1] starts = np.ascontiguousarray(starts_in, dtype=np.int64)
    cdef Py_ssize_t B = starts.shape[0], m = starts.shape[1], p = H.shape[1]
    cdef Py_ssize_t pp = p * p
    G_arr = np.empty((B, p, p))
    cdef double[:, :, ::1] G = G_arr
    cdef Py_ssize_t bb, j, e
    cdef double* g
    cdef double* h
    cdef double* h0 = &H[0, 0, 0]
    with nogil:
        for bb in range(B):
            g = &G[bb, 0, 0]
            h = h0 + starts[bb, 0] * pp
            for e in range(pp):
                g[e] = h[e]
            for j in range(1, m):
                h = h0 + starts[bb, j] * pp
                for e in range(pp):
                    g[e] = g[e] + h[e]
            for e in range(pp):
                g[e] = g[e] * scale
    return G_arr


cdef int _moments_one(double[:, ::1] g, Py_ssize_t* cols, Py_ssize_t k,
                      Py_ssize_t* targets, Py_ssize_t r, double* A, double* L,
                      double* Li, double* S, double[:, ::1] out) nogil:
    cdef Py_ssize_t i, j, l, a, b, c, t
    cdef double s, Scc, sigma2, braw, usu, q11, q22, var_c
    cdef int ok = 1
    for a in range(k):
        for b in range(k):
            A[a * k + b] = g[cols[a], cols[b]]
    for j in range(k):
        s = A[j * k + j]
        for l in range(j):
            s = s - L[j * k + l] * L[j * k + l]
        if not (s > PIVOT_RTOL * A[j * k + j]):
            return 0
        L[j * k + j] = sqrt(s)
        for i in range(j + 1, k):
            s = A[i * k + j]
            for l in range(j):
                s = s - L[i * k + l] * L[j * k + l]
            L[i * k + j] = s / L[j * k + j]
    for j in range(k):
        Li[j * k + j] = 1.0 / L[j * k + j]
        for i in range(j + 1, k):
            s = 0.0
            for l in range(j, i):
                s = s - L[i * k + l] * Li[l * k + j]
            Li[i * k + j] = s / L[i * k + i]
    for a in range(k):
        for b in range(a, k):
            s = 0.0
            for l in range(b, k):
                s = s + Li[l * k + a] * Li[l * k + b]
            S[a * k + b] = s
            S[b * k + a] = s
    for t in range(r):
        c = targets[t]
        Scc = S[c * k + c]
        sigma2 = 1.0 / Scc
        braw = 0.0
        for a in range(1, k):
            if a != c:
                braw = braw + S[a * k + c]
        usu = 0.0
        for a in range(1, k):
            if a == c:
                continue
            for b in range(1, k):
                if b != c:
                    usu = usu + S[a * k + b]
        q11 = S[0] - S[c] * S[c] / Scc
        q22 = usu - braw * braw / Scc
        var_c = A[c * k + c] - A[c] * A[c] / A[0]
        if not ((sigma2 > RESID_RTOL * var_c) and (q11 > 0) and (q22 > 0)):
            ok = 0
        out[t, 0] = -S[c] / Scc
        out[t, 1] = -braw / Scc
        out[t, 2] = sigma2 * q11
        out[t, 3] = sigma2 * q22
        out[t, 4] = sigma2
    return ok


def exclusion_moments(G_in, cols_in, targets_in):
    cdef double[:, :, ::1] G = np.ascontiguousarray(G_in, dtype=np.float64)
    cdef Py_ssize_t B = G.shape[0]
    cdef Py_ssize_t k = len(cols_in), r = len(targets_in)
    out_arr = np.full((B, r, N_MOMENTS), np.nan)
    ok_arr = np.zeros(B, dtype=np.uint8)
    cdef double[:, :, ::1] out = out_arr
    cdef cnp.uint8_t[::1] ok = ok_arr
    cdef Py_ssize_t* cols = <Py_ssize_t*> malloc(k * sizeof(Py_ssize_t))
    cdef Py_ssize_t* targets = <Py_ssize_t*> malloc(r * sizeof(Py_ssize_t))
    cdef double* work = <double*> malloc(4 * k * k * sizeof(double))
    cdef Py_ssize_t i, bb
    if cols == NULL or targets == NULL or work == NULL:
        free(cols); free(targets); free(work)
        raise MemoryError()
    try:
        for i in range(k):
            cols[i] = cols_in[i]
        for i in range(r):
            targets[i] = targets_in[i]
        with nogil:
            for bb in range(B):
                ok[bb] = _moments_one(G[bb], cols, k, targets, r, work, work + k * k,
                                      work + 2 * k * k, work + 3 * k * k, out[bb])
    finally:
        free(cols)
        free(targets)
        free(work)
    return out_arr, ok_arr.astype(bool)


def var_garch(v_in, phi_in, mu_in, bmat_in, a_in, double omega, double arch, double garch):
    cdef double[:, ::1] v = np.ascontiguousarray(v_in, dtype=np.float64)
    cdef double[:, ::1] phi = np.ascontiguousarray(phi_in, dtype=np.float64)
    cdef double[::1] mu = np.ascontiguousarray(mu_in, dtype=np.float64)
    cdef double[:, ::1] bmat = np.ascontiguousarray(bmat_in, dtype=np.float64).reshape(-1, phi.shape[0])
    cdef double[::1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], d = v.shape[1], K = phi.shape[0]
    cdef Py_ssize_t N = d - K
    out_arr = np.empty((n, d))
    cdef double[:, ::1] out = out_arr
    h_arr = np.ones(d)
    eta_arr = np.zeros(d)
    prev_arr = np.array(mu_in, dtype=np.float64)
    cur_arr = np.empty(K)
    cdef double[::1] h = h_arr, eta = eta_arr, prev = prev_arr, cur = cur_arr
    cdef Py_ssize_t t, i, l
    cdef double acc
    with nogil:
        for t in range(n):
            for i in range(d):
                h[i] = omega + arch * eta[i] * eta[i] + garch * h[i]
                eta[i] = sqrt(h[i]) * v[t, i]
            for i in range(K):
                acc = mu[i]
                for l in range(K):
                    acc = acc + phi[i, l] * prev[l]
                cur[i] = acc + eta[i]
                out[t, i] = cur[i]
            for i in range(N):
                acc = a[i]
                for l in range(K):
                    acc = acc + bmat[i, l] * cur[l]
                out[t, K + i] = acc + eta[K + i]
            for i in range(K):
                prev[i] = cur[i]
    return out_arr
