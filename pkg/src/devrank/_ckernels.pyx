# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled gather kernel for CSR-grouped edge lists.

Each output row is accumulated sequentially in stored edge order, so the
result does not depend on how rows are split across OpenMP threads.
"""
import numpy as np

from cython.parallel cimport prange


cdef inline double _row_sum(const Py_ssize_t[::1] indptr,
                            const Py_ssize_t[::1] indices,
                            const double[::1] weights,
                            const double[::1] x,
                            Py_ssize_t row) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t e
    for e in range(indptr[row], indptr[row + 1]):
        acc = acc + weights[e] * x[indices[e]]
    return acc


def csr_gather(const Py_ssize_t[::1] indptr,
               const Py_ssize_t[::1] indices,
               const double[::1] weights,
               const double[::1] x,
               int threads=1):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    if threads > 1:
        with nogil:
            for i in prange(n, num_threads=threads, schedule="static"):
                o[i] = _row_sum(indptr, indices, weights, x, i)
    else:
        with nogil:
            for i in range(n):
                o[i] = _row_sum(indptr, indices, weights, x, i)
    return out
