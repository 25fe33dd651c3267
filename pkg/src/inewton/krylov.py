"""Restarted GMRES with right preconditioning.

The stopping rule is driven by the forcing term eta: the solve ends once the
TRUE (unpreconditioned) residual satisfies ||b - A x|| <= max(eta*||b||,
abs_floor). Right preconditioning keeps the least-squares recurrence residual
in the unpreconditioned norm, so the per-iteration history this module
records is directly comparable with the nonlinear residual when diagnosing
oversolving; the true residual is still recomputed at every restart before
convergence is declared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import Ilu0Factors, ilu0_apply, norm2, spmv

# guard against eta = 0 requests that finite precision cannot honour
RELATIVE_FLOOR = 1e-14


@dataclass(frozen=True)
class KrylovConfig:
    max_iters: int = 500
    restart: int = 50
    abs_floor: float = 0.0
    preconditioner: str = "ilu0"  # "ilu0" or "none"; consulted by the Newton driver

    def __post_init__(self):
        if self.max_iters < 1 or self.restart < 1:
            raise ValueError("max_iters and restart must be positive")
        if self.restart > self.max_iters:
            raise ValueError("restart must not exceed max_iters")
        if self.abs_floor < 0:
            raise ValueError("abs_floor must be non-negative")
        if self.preconditioner not in ("ilu0", "none"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class KrylovResult:
    solution: np.ndarray
    iterations: int
    relative_residual_history: list[float]
    converged: bool
    cycle_lengths: list[int] | None = None
    # populated only when gmres_solve(..., record_iterates=True)
    iterates: list[np.ndarray] | None = None


def _apply_right_prec(M, v):
    return v if M is None else ilu0_apply(M, v)


def _assemble_update(V, H, g, k, M):
    """Solve the k x k triangular least-squares system and map the Krylov
    coefficients back through the right preconditioner."""
    y = np.zeros(k)
    for i in range(k - 1, -1, -1):
        y[i] = (g[i] - H[i, i + 1:k] @ y[i + 1:k]) / H[i, i]
    return _apply_right_prec(M, y @ V[:k])


def gmres_solve(A, b, eta, M: Ilu0Factors | None = None,
                cfg: KrylovConfig | None = None,
                record_iterates: bool = False) -> KrylovResult:
    """Solve A x = b to relative tolerance eta from a zero initial guess.

    Returns the best iterate with converged=False when max_iters is
    exhausted. Arnoldi happy breakdown is success (the subspace then contains
    the exact solution).
    """
    if cfg is None:
        cfg = KrylovConfig()
    if A.n_rows != A.n_cols:
        raise ValueError("gmres_solve requires a square matrix")
    if not 0.0 <= eta < 1.0:
        raise ValueError("eta must lie in [0, 1)")
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.n_rows,):
        raise ValueError("right-hand side has wrong length")
    n = A.n_rows

    history: list[float] = []
    cycles: list[int] = []
    iterates: list[np.ndarray] | None = [] if record_iterates else None
    bnorm = norm2(b)
    if bnorm == 0.0:
        return KrylovResult(np.zeros(n), 0, history, True, cycles, iterates)
    tol = max(eta * bnorm, cfg.abs_floor, RELATIVE_FLOOR * bnorm)

    x = np.zeros(n)
    total = 0
    while True:
        r = b - spmv(A, x)
        rnorm = norm2(r)
        if rnorm <= tol:
            return KrylovResult(x, total, history, True, cycles, iterates)
        if total >= cfg.max_iters:
            return KrylovResult(x, total, history, False, cycles, iterates)

        m = min(cfg.restart, cfg.max_iters - total)
        V = np.empty((m + 1, n))
        V[0] = r / rnorm
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = rnorm

        k_used = 0
        for j in range(m):
            w = spmv(A, _apply_right_prec(M, V[j]))
            wnorm0 = norm2(w)
            for i in range(j + 1):
                hij = float(V[i] @ w)
                H[i, j] = hij
                w -= hij * V[i]
            hnext = norm2(w)
            H[j + 1, j] = hnext

            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            denom = math.hypot(H[j, j], H[j + 1, j])
            if denom == 0.0:
                # column adds nothing the least-squares problem can use
                break
            cs[j] = H[j, j] / denom
            sn[j] = H[j + 1, j] / denom
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]

            total += 1
            k_used = j + 1
            history.append(abs(g[j + 1]) / bnorm)
            if record_iterates:
                iterates.append(x + _assemble_update(V, H, g, k_used, M))
            if abs(g[j + 1]) <= tol or hnext <= 1e-14 * max(wnorm0, 1e-300):
                break
            V[j + 1] = w / hnext

        cycles.append(k_used)
        if k_used:
            x = x + _assemble_update(V, H, g, k_used, M)
        else:
            # no usable direction: report the best iterate we have
            return KrylovResult(x, total, history, False, cycles, iterates)
