# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_kernels_py``.

Same signatures and return conventions; the Python module is the reference.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memmove
from libc.math cimport sqrt

cnp.import_array()


cdef inline Py_ssize_t _lower(double* buf, Py_ssize_t m, double v) noexcept nogil:
    cdef Py_ssize_t a = 0, b = m, c
    while a < b:
        c = (a + b) >> 1
        if buf[c] < v:
            a = c + 1
        else:
            b = c
    return a


def max_cube_count(xs, ys, double side, double tol):
    # The y-values of the current x-strip are kept sorted in ``buf``; points
    # enter and leave with a memmove instead of re-sorting every strip.
    cdef double[::1] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] Y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0]
    if n == 0:
        return 0
    cdef double* buf = <double*>malloc(n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, lo = 0, hi = 0, m = 0, a, b, k
    cdef Py_ssize_t best = 0, prev_lo = -1, prev_hi = -1
    cdef double reach
    try:
        with nogil:
            for i in range(n):
                while lo < n and X[lo] < X[i] - tol:
                    if lo < hi:
                        k = _lower(buf, m, Y[lo])
                        memmove(buf + k, buf + k + 1, (m - k - 1) * sizeof(double))
                        m -= 1
                    lo += 1
                if hi < lo:
                    hi = lo
                while hi < n and X[hi] <= X[i] + side + tol:
                    k = _lower(buf, m, Y[hi])
                    memmove(buf + k + 1, buf + k, (m - k) * sizeof(double))
                    buf[k] = Y[hi]
                    m += 1
                    hi += 1
                if m <= best or (lo == prev_lo and hi == prev_hi):
                    continue
                prev_lo = lo
                prev_hi = hi
                b = 0
                for a in range(m):
                    reach = buf[a] + side + tol
                    if b < a:
                        b = a
                    while b < m and buf[b] <= reach:
                        b += 1
                    if b - a > best:
                        best = b - a
    finally:
        free(buf)
    return int(best)


def twisted_convolve_dense(F, presF, G, presG, nbr, sumidx, phase, out_bases):
    cdef double complex[:, :, :, ::1] Fv = np.ascontiguousarray(F, dtype=np.complex128)
    cdef double complex[:, :, :, ::1] Gv = np.ascontiguousarray(G, dtype=np.complex128)
    cdef cnp.uint8_t[:, ::1] pF = np.ascontiguousarray(presF, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] pG = np.ascontiguousarray(presG, dtype=np.uint8)
    cdef cnp.intp_t[:, ::1] nb = np.ascontiguousarray(nbr, dtype=np.intp)
    cdef cnp.intp_t[:, ::1] si = np.ascontiguousarray(sumidx, dtype=np.intp)
    cdef double complex[:, ::1] ph = np.ascontiguousarray(phase, dtype=np.complex128)
    cdef cnp.intp_t[::1] ob = np.ascontiguousarray(out_bases, dtype=np.intp)

    cdef Py_ssize_t m = Fv.shape[0], s = Fv.shape[1], N = Fv.shape[2], K = Fv.shape[3]
    cdef Py_ssize_t M = Gv.shape[3], nout = ob.shape[0]
    out_arr = np.zeros((nout, s, N, M), dtype=np.complex128)
    loss_arr = np.zeros(nout, dtype=np.float64)
    cdef double complex[:, :, :, ::1] out = out_arr
    cdef double[::1] loss = loss_arr
    nF_arr = np.sqrt(np.sum(np.abs(np.asarray(Fv)) ** 2, axis=(2, 3)))
    nG_arr = np.sqrt(np.sum(np.abs(np.asarray(Gv)) ** 2, axis=(2, 3)))
    cdef double[:, ::1] nF = np.ascontiguousarray(nF_arr)
    cdef double[:, ::1] nG = np.ascontiguousarray(nG_arr)

    cdef Py_ssize_t o, b, b2, su, sv, t, a, c, k
    cdef long missing = 0
    cdef double complex acc, p
    with nogil:
        for o in range(nout):
            b = ob[o]
            for su in range(s):
                if not pG[b, su]:
                    continue
                b2 = nb[b, su]
                if b2 < 0:
                    missing += 1
                    continue
                for sv in range(s):
                    if not pF[b2, sv]:
                        continue
                    t = si[sv, su]
                    if t < 0:
                        loss[o] += nG[b, su] * nF[b2, sv]
                        continue
                    p = ph[sv, su]
                    for a in range(N):
                        for c in range(M):
                            acc = 0
                            for k in range(K):
                                acc = acc + Fv[b2, sv, a, k] * Gv[b, su, k, c]
                            out[o, t, a, c] = out[o, t, a, c] + acc * p
    return out_arr, loss_arr, int(missing)
