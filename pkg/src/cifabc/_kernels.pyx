# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bootstrap replicate kernel (same contract as ``_kernels_py``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


cdef void _cumulate(const double[:] p, const double[:] q, double[:] cp, double[:] cq) noexcept nogil:
    cdef Py_ssize_t i, m = p.shape[0]
    cdef double sp = 0.0, sq = 0.0
    cp[0] = 0.0
    cq[0] = 0.0
    for i in range(m):
        sp += p[i]
        sq += q[i]
        cp[i + 1] = sp
        cq[i + 1] = sq


def replicate_functionals(const double[:, ::1] P1, const double[:, ::1] Q1,
                          const cnp.intp_t[::1] idx1, const double[::1] f1,
                          const double[:, ::1] P2, const double[:, ::1] Q2,
                          const cnp.intp_t[::1] idx2, const double[::1] f2,
                          const double[::1] widths):
    cdef Py_ssize_t B = P1.shape[0], G = widths.shape[0]
    cdef Py_ssize_t b, g
    cdef double[::1] cp1 = np.empty(P1.shape[1] + 1)
    cdef double[::1] cq1 = np.empty(P1.shape[1] + 1)
    cdef double[::1] cp2 = np.empty(P2.shape[1] + 1)
    cdef double[::1] cq2 = np.empty(P2.shape[1] + 1)
    out = np.empty((B, 4))
    cdef double[:, ::1] o = out
    cdef double d, ad, w, s_abs, s_max, s_sq, s_sgn
    with nogil:
        for b in range(B):
            _cumulate(P1[b], Q1[b], cp1, cq1)
            _cumulate(P2[b], Q2[b], cp2, cq2)
            s_abs = 0.0
            s_max = 0.0
            s_sq = 0.0
            s_sgn = 0.0
            for g in range(G):
                d = (cp1[idx1[g]] - f1[g] * cq1[idx1[g]]) - (cp2[idx2[g]] - f2[g] * cq2[idx2[g]])
                ad = fabs(d)
                w = widths[g]
                s_abs += ad * w
                s_sq += d * d * w
                s_sgn += d * w
                if ad > s_max:
                    s_max = ad
            o[b, 0] = s_abs
            o[b, 1] = s_max
            o[b, 2] = s_sq
            o[b, 3] = s_sgn
    return out
