# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled CSR kernels: sparse matrix-vector product, ILU(0) factorization
and the two triangular substitutions it needs. Signatures match
`_kernels_py` exactly; the arrays are the raw CSR components."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t


def spmv(const idx_t[::1] indptr, const idx_t[::1] indices,
         const double[::1] data, const double[::1] x, double[::1] out):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        out[i] = acc


def ilu0_factorize(const idx_t[::1] indptr, const idx_t[::1] indices,
                   double[::1] data, const idx_t[::1] diag_pos):
    """In-place ILU(0) on the value array. Returns the row index of a zero
    pivot, or -1 on success."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, kpos, k, pk, pi
    cdef idx_t ck, ci
    cdef double piv, factor
    for i in range(n):
        for kpos in range(indptr[i], diag_pos[i]):
            k = indices[kpos]
            piv = data[diag_pos[k]]
            if piv == 0.0:
                return k
            factor = data[kpos] / piv
            data[kpos] = factor
            # subtract factor * (upper part of row k) from row i, pattern-restricted
            pk = diag_pos[k] + 1
            pi = kpos + 1
            while pk < indptr[k + 1] and pi < indptr[i + 1]:
                ck = indices[pk]
                ci = indices[pi]
                if ck == ci:
                    data[pi] -= factor * data[pk]
                    pk += 1
                    pi += 1
                elif ck < ci:
                    pk += 1
                else:
                    pi += 1
        if data[diag_pos[i]] == 0.0:
            return i
    return -1


def solve_lower_unit(const idx_t[::1] indptr, const idx_t[::1] indices,
                     const double[::1] data, const idx_t[::1] diag_pos,
                     const double[::1] b, double[::1] out):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double s
    for i in range(n):
        s = b[i]
        for k in range(indptr[i], diag_pos[i]):
            s -= data[k] * out[indices[k]]
        out[i] = s


def solve_upper(const idx_t[::1] indptr, const idx_t[::1] indices,
                const double[::1] data, const idx_t[::1] diag_pos,
                const double[::1] b, double[::1] out):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double s
    for i in range(n - 1, -1, -1):
        s = b[i]
        for k in range(diag_pos[i] + 1, indptr[i + 1]):
            s -= data[k] * out[indices[k]]
        out[i] = s / data[diag_pos[i]]
