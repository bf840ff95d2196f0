# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled depth-count kernel.

Mirrors ``_fallback.depth_counts`` operation for operation: the same
float64 expression order, correctly rounded sqrt, and integer counting,
so results are bit-identical to the numpy path (the build disables FMA
contraction and fast-math to keep it that way).
"""
from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def depth_counts(t, perp2, tips, cos_alphas):
    """See ``dqfkit._kernels._fallback.depth_counts``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t_ = np.ascontiguousarray(t, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p_ = np.ascontiguousarray(perp2, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c_ = np.ascontiguousarray(tips, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_ = np.ascontiguousarray(cos_alphas, dtype=np.float64)

    cdef Py_ssize_t n = t_.shape[0]
    cdef Py_ssize_t m = c_.shape[0]
    cdef Py_ssize_t k = a_.shape[0]

    cdef cnp.ndarray[cnp.int64_t, ndim=2] counts_a = np.zeros((k, m), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] counts_b = np.zeros((k, m), dtype=np.int64)

    cdef double[:] tv = t_
    cdef double[:] pv = p_
    cdef double[:] cv = c_
    cdef double[:] av = a_
    cdef long long[:, :] ca_v = counts_a
    cdef long long[:, :] cb_v = counts_b

    cdef Py_ssize_t i, jm, ka
    cdef double c, d, axial, dist, ca
    cdef bint on_a

    with nogil:
        for jm in range(m):
            c = cv[jm]
            d = 1.0 if c <= 0.0 else -1.0
            for i in range(n):
                axial = d * (tv[i] - c)
                dist = sqrt(axial * axial + pv[i])
                on_a = d * tv[i] <= 0.0
                for ka in range(k):
                    ca = av[ka]
                    if axial >= ca * dist:
                        if on_a:
                            ca_v[ka, jm] += 1
                        else:
                            cb_v[ka, jm] += 1
    return counts_a, counts_b
