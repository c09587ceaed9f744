# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  Must stay numerically identical to ``_pykernels``."""
from libc.math cimport sqrt, fabs
import numpy as np


def jacobi_eigh(a_in, double tol=1e-10, int max_sweeps=100):
    """Cyclic Jacobi diagonalisation, row-by-row (p < q) sweep order.

    Returns ``(diagonal, V, sweeps)`` with ``a_in = V diag V^T``; the
    diagonal is not sorted.
    """
    a_np = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = a_np.shape[0]
    v_np = np.eye(n)
    cdef double[:, ::1] a = a_np
    cdef double[:, ::1] v = v_np
    cdef Py_ssize_t p, q, k
    cdef double frob = 0.0, off, apq, tau, t, c, s, x, y
    cdef int sweep = 0

    for p in range(n):
        for q in range(n):
            frob += a[p, q] * a[p, q]
    frob = sqrt(frob)
    if frob == 0.0:
        return np.diag(a_np).copy(), v_np, 0

    while True:
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        off = sqrt(2.0 * off)
        if off < tol * frob or sweep >= max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    x = a[k, p]
                    y = a[k, q]
                    a[k, p] = c * x - s * y
                    a[k, q] = s * x + c * y
                for k in range(n):
                    x = a[p, k]
                    y = a[q, k]
                    a[p, k] = c * x - s * y
                    a[q, k] = s * x + c * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    x = v[k, p]
                    y = v[k, q]
                    v[k, p] = c * x - s * y
                    v[k, q] = s * x + c * y
        sweep += 1
    return np.diag(a_np).copy(), v_np, sweep


def coupling_matrix(intervals, starts, ends, double alpha,
                    double psc_leap=0.3, double psc_step=0.15, int reach=2):
    """Off-diagonal melodic coupling with a zero diagonal."""
    iv_np = np.ascontiguousarray(intervals, dtype=np.int64)
    st_np = np.ascontiguousarray(starts, dtype=np.int64)
    en_np = np.ascontiguousarray(ends, dtype=np.int64)
    cdef long long[::1] iv = iv_np
    cdef long long[::1] st = st_np
    cdef long long[::1] en = en_np
    cdef Py_ssize_t n = iv_np.shape[0]
    out_np = np.zeros((n, n))
    cdef double[:, ::1] out = out_np
    cdef Py_ssize_t i, j
    cdef long long d, d2
    cdef double pij, pji
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = iv[i] - iv[j]
            if d < 0:
                d = -d
            pij = 0.0
            d2 = st[j] - en[i]
            if -reach <= d2 <= reach:
                pij = psc_leap if iv[i] >= 3 else psc_step
            pji = 0.0
            d2 = st[i] - en[j]
            if -reach <= d2 <= reach:
                pji = psc_leap if iv[j] >= 3 else psc_step
            out[i, j] = alpha / (1.0 + d) + pij + pji
    return out_np
