"""NumPy fallback for the CSR kernels.

Mirrors the signatures of the compiled module `_kernels` so the two are
interchangeable behind `inewton.linalg.backend`. The sequential kernels
(ILU factorization, triangular solves) loop over rows in Python, which is
acceptable at the problem sizes this package targets.
"""

import numpy as np


def spmv(indptr, indices, data, x, out):
    """out[i] = sum_k data[k] * x[indices[k]] over row i's entries."""
    if data.shape[0] == 0:
        out[:] = 0.0
        return
    acc = np.concatenate(([0.0], np.cumsum(data * x[indices])))
    out[:] = acc[indptr[1:]] - acc[indptr[:-1]]


def ilu0_factorize(indptr, indices, data, diag_pos):
    """In-place ILU(0) on the CSR value array; returns the row of a zero
    pivot, or -1 on success. `diag_pos[i]` locates the diagonal of row i."""
    n = indptr.shape[0] - 1
    for i in range(n):
        row_start = indptr[i]
        row_end = indptr[i + 1]
        dpos = diag_pos[i]
        pos_of = {int(indices[p]): p for p in range(row_start, row_end)}
        for kpos in range(row_start, dpos):
            k = int(indices[kpos])
            piv = data[diag_pos[k]]
            if piv == 0.0:
                return k
            factor = data[kpos] / piv
            data[kpos] = factor
            for p in range(diag_pos[k] + 1, indptr[k + 1]):
                tgt = pos_of.get(int(indices[p]))
                if tgt is not None:
                    data[tgt] -= factor * data[p]
        if data[dpos] == 0.0:
            return i
    return -1


def solve_lower_unit(indptr, indices, data, diag_pos, b, out):
    """Forward substitution with the unit-lower part (entries left of the
    diagonal; the unit diagonal is implicit)."""
    n = indptr.shape[0] - 1
    for i in range(n):
        lo = indptr[i]
        hi = diag_pos[i]
        s = b[i]
        if hi > lo:
            s -= data[lo:hi] @ out[indices[lo:hi]]
        out[i] = s


def solve_upper(indptr, indices, data, diag_pos, b, out):
    """Backward substitution with the upper part including the stored
    diagonal."""
    n = indptr.shape[0] - 1
    for i in range(n - 1, -1, -1):
        lo = diag_pos[i] + 1
        hi = indptr[i + 1]
        s = b[i]
        if hi > lo:
            s -= data[lo:hi] @ out[indices[lo:hi]]
        out[i] = s / data[diag_pos[i]]
