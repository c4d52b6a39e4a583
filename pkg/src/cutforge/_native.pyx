# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels. See ``_fallback`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, copysign
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline void _insertion_sort(double* a, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double x
    for i in range(1, k):
        x = a[i]
        j = i - 1
        while j >= 0 and a[j] > x:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = x


cdef inline double _sorted_product(double* a, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t i
    cdef double p = 1.0
    _insertion_sort(a, k)
    for i in range(k):
        p *= a[i]
    return p


def edge_terms(const double[:, ::1] C, const double[:, ::1] S, const cnp.intp_t[::1] eu, const cnp.intp_t[::1] ev):
    cdef Py_ssize_t n = C.shape[0]
    cdef Py_ssize_t m = eu.shape[0]
    cdef Py_ssize_t e, k, u, v, nu, nv, np_, nm
    cdef double cc, ss, f
    A_arr = np.empty(m)
    B_arr = np.empty(m)
    cdef double[::1] A = A_arr
    cdef double[::1] B = B_arr
    cdef double* bu = <double*> malloc(4 * (n + 1) * sizeof(double))
    if bu == NULL:
        raise MemoryError()
    cdef double* bv = bu + (n + 1)
    cdef double* bp = bv + (n + 1)
    cdef double* bm = bp + (n + 1)
    try:
        with nogil:
            for e in range(m):
                u = eu[e]
                v = ev[e]
                nu = 0
                nv = 0
                np_ = 0
                nm = 0
                for k in range(n):
                    if k == u or k == v:
                        continue
                    # factors equal to 1.0 are exact no-ops in the product
                    f = C[u, k]
                    if f != 1.0:
                        bu[nu] = f
                        nu += 1
                    f = C[v, k]
                    if f != 1.0:
                        bv[nv] = f
                        nv += 1
                    cc = C[u, k] * C[v, k]
                    ss = S[u, k] * S[v, k]
                    f = cc - ss
                    if f != 1.0:
                        bp[np_] = f
                        np_ += 1
                    f = cc + ss
                    if f != 1.0:
                        bm[nm] = f
                        nm += 1
                A[e] = -0.5 * S[u, v] * (_sorted_product(bu, nu) + _sorted_product(bv, nv))
                B[e] = -0.5 * (_sorted_product(bp, np_) - _sorted_product(bm, nm))
    finally:
        free(bu)
    return A_arr, B_arr


def brute_force_maxcut(int n, eu_in, ev_in, w_in):
    cdef const cnp.int64_t[::1] eu = np.ascontiguousarray(eu_in, dtype=np.int64)
    cdef const cnp.int64_t[::1] ev = np.ascontiguousarray(ev_in, dtype=np.int64)
    cdef const double[::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef Py_ssize_t m = eu.shape[0]
    cdef cnp.int64_t total = (<cnp.int64_t> 1) << (n - 1)
    cdef cnp.int64_t x, y, best_idx = 0
    cdef Py_ssize_t e
    cdef double val, best_val = -1.0 / 0.0
    with nogil:
        for x in range(total):
            y = x << 1
            val = 0.0
            for e in range(m):
                if ((y >> eu[e]) ^ (y >> ev[e])) & 1:
                    val += w[e]
            if val > best_val:
                best_val = val
                best_idx = x
    return best_val, best_idx


def jacobi_eigenvalues(A_in, double tol=1e-12, int max_sweeps=100):
    A_arr = np.array(A_in, dtype=np.float64, order="C")
    cdef double[:, ::1] A = A_arr
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t p, q, r
    cdef int sweep
    cdef double apq, app, aqq, g, theta, t, c, s, arp, arq, off, fro
    fro = 0.0
    for p in range(n):
        for q in range(n):
            fro += A[p, q] * A[p, q]
    cdef double scale = max(1.0, sqrt(fro))
    with nogil:
        for sweep in range(max_sweeps):
            off = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        off += A[p, q] * A[p, q]
            if sqrt(off) <= tol * scale:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if apq == 0.0:
                        continue
                    app = A[p, p]
                    aqq = A[q, q]
                    g = 100.0 * fabs(apq)
                    if fabs(app) + g == fabs(app) and fabs(aqq) + g == fabs(aqq):
                        A[p, q] = 0.0
                        A[q, p] = 0.0
                        continue
                    theta = (aqq - app) / (2.0 * apq)
                    t = copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for r in range(n):
                        arp = A[r, p]
                        arq = A[r, q]
                        A[r, p] = c * arp - s * arq
                        A[r, q] = s * arp + c * arq
                    for r in range(n):
                        A[p, r] = A[r, p]
                        A[q, r] = A[r, q]
                    A[p, p] = app - t * apq
                    A[q, q] = aqq + t * apq
                    A[p, q] = 0.0
                    A[q, p] = 0.0
    return np.sort(np.diag(A_arr).copy())
