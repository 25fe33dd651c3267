import numpy as np
import pytest

from inewton import CsrMatrix


def laplacian1d(n: int) -> CsrMatrix:
    """tridiag(-1, 2, -1); its ILU(0) drops nothing, so the factorization
    is the exact LU."""
    rows, cols, vals = [], [], []
    for i in range(n):
        rows.append(i); cols.append(i); vals.append(2.0)
        if i > 0:
            rows.append(i); cols.append(i - 1); vals.append(-1.0)
        if i < n - 1:
            rows.append(i); cols.append(i + 1); vals.append(-1.0)
    return CsrMatrix.from_coo(n, n, rows, cols, vals)


def random_sparse(rng, n, density=0.3, diag_boost=None) -> CsrMatrix:
    a = rng.uniform(-1.0, 1.0, size=(n, n))
    a[rng.uniform(size=(n, n)) > density] = 0.0
    if diag_boost is not None:
        a[np.diag_indices(n)] += diag_boost
    return CsrMatrix.from_dense(a, drop_tol=-1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
