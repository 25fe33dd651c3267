from .backend import kernel_backend
from .sparse import (
    CsrMatrix,
    Ilu0Factors,
    ZeroPivotError,
    identity,
    ilu0_apply,
    ilu0_factorize,
    norm2,
    spmv,
)

__all__ = [
    "CsrMatrix",
    "Ilu0Factors",
    "ZeroPivotError",
    "identity",
    "ilu0_apply",
    "ilu0_factorize",
    "kernel_backend",
    "norm2",
    "spmv",
]
