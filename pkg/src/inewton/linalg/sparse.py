"""CSR matrices, vector norms and the ILU(0) preconditioner.

Vectors are plain 1-D float64 NumPy arrays throughout the package. The only
sparse format is CSR; duplicate entries passed to the COO constructor are
summed. Everything here is immutable by convention once constructed and all
operations are pure functions.
"""

from __future__ import annotations

import numpy as np

from .backend import kernels as _K


class ZeroPivotError(ValueError):
    """ILU(0) hit a zero or structurally missing pivot."""

    def __init__(self, row: int, message: str):
        super().__init__(message)
        self.row = row


def _as_index_array(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _as_value_array(a):
    return np.ascontiguousarray(a, dtype=np.float64)


class CsrMatrix:
    """Sparse matrix in compressed-sparse-row form.

    Column indices are strictly increasing within each row; `row_offsets`
    has length n_rows + 1 with row_offsets[0] == 0 and row_offsets[-1] equal
    to the number of stored entries.
    """

    def __init__(self, n_rows, n_cols, row_offsets, col_indices, values, validate=True):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.row_offsets = _as_index_array(row_offsets)
        self.col_indices = _as_index_array(col_indices)
        self.values = _as_value_array(values)
        self._diag_pos = None
        if validate:
            self._validate()

    def _validate(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if self.row_offsets.shape != (self.n_rows + 1,):
            raise ValueError("row_offsets must have length n_rows + 1")
        if self.row_offsets[0] != 0:
            raise ValueError("row_offsets[0] must be 0")
        if np.any(np.diff(self.row_offsets) < 0):
            raise ValueError("row_offsets must be non-decreasing")
        nnz = int(self.row_offsets[-1])
        if self.col_indices.shape != (nnz,) or self.values.shape != (nnz,):
            raise ValueError("col_indices/values inconsistent with row_offsets")
        if nnz:
            if self.col_indices.min() < 0 or self.col_indices.max() >= self.n_cols:
                raise ValueError("column index out of range")
            if not np.all(np.isfinite(self.values)):
                raise ValueError("matrix values must be finite")
        if nnz > 1:
            increasing = np.diff(self.col_indices) > 0
            # positions p and p+1 belong to the same row unless a row starts at p+1
            boundary = np.zeros(nnz + 1, dtype=bool)
            boundary[self.row_offsets] = True
            same_row = ~boundary[1:nnz]
            if np.any(same_row & ~increasing):
                raise ValueError("column indices must be strictly increasing within each row")

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[-1])

    @classmethod
    def from_coo(cls, n_rows, n_cols, rows, cols, vals):
        """Build from triplets; duplicate (row, col) entries are summed."""
        rows = _as_index_array(rows)
        cols = _as_index_array(cols)
        vals = _as_value_array(vals)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows/cols/vals must have equal length")
        if rows.size == 0:
            return cls(n_rows, n_cols, np.zeros(n_rows + 1, np.int64), [], [])
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        new_key = np.empty(rows.size, dtype=bool)
        new_key[0] = True
        new_key[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        group = np.cumsum(new_key) - 1
        summed = np.bincount(group, weights=vals)
        rows_u = rows[new_key]
        cols_u = cols[new_key]
        offsets = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows_u, minlength=n_rows), out=offsets[1:])
        return cls(n_rows, n_cols, offsets, cols_u, summed)

    @classmethod
    def from_dense(cls, a, drop_tol=0.0):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        rows, cols = np.nonzero(np.abs(a) > drop_tol)
        return cls.from_coo(a.shape[0], a.shape[1], rows, cols, a[rows, cols])

    def to_dense(self):
        out = np.zeros((self.n_rows, self.n_cols))
        for i in range(self.n_rows):
            lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
            out[i, self.col_indices[lo:hi]] = self.values[lo:hi]
        return out

    def diagonal_positions(self):
        """Index into `values` of each row's diagonal entry.

        Raises ZeroPivotError for a structurally missing diagonal.
        """
        if self._diag_pos is None:
            if self.n_rows != self.n_cols:
                raise ValueError("diagonal of a non-square matrix")
            pos = np.empty(self.n_rows, dtype=np.int64)
            for i in range(self.n_rows):
                lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
                k = lo + np.searchsorted(self.col_indices[lo:hi], i)
                if k >= hi or self.col_indices[k] != i:
                    raise ZeroPivotError(i, f"row {i} has no stored diagonal entry")
                pos[i] = k
            self._diag_pos = pos
        return self._diag_pos

    def with_values(self, values):
        """Same sparsity pattern, new values (arrays are shared, not copied)."""
        m = CsrMatrix(self.n_rows, self.n_cols, self.row_offsets, self.col_indices,
                      values, validate=False)
        if not np.all(np.isfinite(m.values)):
            raise ValueError("matrix values must be finite")
        m._diag_pos = self._diag_pos
        return m

    def __matmul__(self, x):
        return spmv(self, x)

    def __repr__(self):
        return f"CsrMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"


def identity(n: int) -> CsrMatrix:
    idx = np.arange(n, dtype=np.int64)
    return CsrMatrix(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))


def norm2(x) -> float:
    """Euclidean norm used for every residual and tolerance in the package."""
    return float(np.linalg.norm(np.asarray(x, dtype=np.float64)))


def spmv(A: CsrMatrix, x) -> np.ndarray:
    x = _as_value_array(x)
    if x.shape != (A.n_cols,):
        raise ValueError(f"dimension mismatch: matrix is {A.n_rows}x{A.n_cols}, "
                         f"vector has length {x.shape[0] if x.ndim == 1 else x.shape}")
    out = np.empty(A.n_rows)
    _K.spmv(A.row_offsets, A.col_indices, A.values, x, out)
    return out


class Ilu0Factors:
    """Combined LU storage of an ILU(0) factorization.

    Shares the sparsity pattern of the source matrix (zero fill-in); L is
    unit lower triangular (diagonal implicit), U holds the stored diagonal.
    """

    def __init__(self, n, row_offsets, col_indices, values, diag_pos):
        self.n = n
        self.row_offsets = row_offsets
        self.col_indices = col_indices
        self.values = values
        self.diag_pos = diag_pos


def ilu0_factorize(A: CsrMatrix) -> Ilu0Factors:
    """ILU(0) factorization of a square matrix with a structurally nonzero
    diagonal. Exact (equal to LU) whenever elimination creates no fill
    outside A's pattern, e.g. diagonal, triangular or tridiagonal matrices.
    """
    if A.n_rows != A.n_cols:
        raise ValueError("ILU(0) requires a square matrix")
    diag_pos = A.diagonal_positions()
    values = A.values.copy()
    bad = _K.ilu0_factorize(A.row_offsets, A.col_indices, values, diag_pos)
    if bad >= 0:
        raise ZeroPivotError(int(bad), f"zero pivot in row {int(bad)} during ILU(0)")
    return Ilu0Factors(A.n_rows, A.row_offsets, A.col_indices, values, diag_pos)


def ilu0_apply(F: Ilu0Factors, r) -> np.ndarray:
    """Solve L U z = r by forward then backward substitution."""
    r = _as_value_array(r)
    if r.shape != (F.n,):
        raise ValueError("dimension mismatch in preconditioner apply")
    y = np.empty(F.n)
    _K.solve_lower_unit(F.row_offsets, F.col_indices, F.values, F.diag_pos, r, y)
    z = np.empty(F.n)
    _K.solve_upper(F.row_offsets, F.col_indices, F.values, F.diag_pos, y, z)
    return z
