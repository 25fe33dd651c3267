"""Desk-scale nonlinear test problems.

Each problem bundles a residual, an analytic CSR Jacobian, an initial guess
and, when one is known, the exact solution. Residual and Jacobian evaluation
are pure; problem objects are safe to share.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import CsrMatrix


class NonPhysicalStateWarning(UserWarning):
    """State left the physically meaningful range during a residual
    evaluation; the residual is still returned."""


@dataclass(frozen=True)
class NonlinearProblem:
    name: str
    n: int
    residual: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], CsrMatrix]
    initial_guess: np.ndarray
    exact_solution: np.ndarray | None = None


def bratu2d(grid_n: int, lam: float) -> NonlinearProblem:
    """Solid-fuel ignition model on the unit square: -laplace(u) = lam*e^u
    with homogeneous Dirichlet boundaries, 5-point stencil, cell-area
    scaling. lam = 0 reduces to the pure Laplace problem with solution 0.
    """
    if grid_n < 3:
        raise ValueError("grid_n must be at least 3")
    if lam < 0:
        raise ValueError("lam must be non-negative")
    n = grid_n * grid_n
    h2 = (1.0 / (grid_n + 1)) ** 2

    rows, cols, vals = [], [], []
    for j in range(grid_n):
        for i in range(grid_n):
            k = j * grid_n + i
            rows.append(k); cols.append(k); vals.append(4.0)
            for kk in (k - 1 if i > 0 else None,
                       k + 1 if i < grid_n - 1 else None,
                       k - grid_n if j > 0 else None,
                       k + grid_n if j < grid_n - 1 else None):
                if kk is not None:
                    rows.append(k); cols.append(kk); vals.append(-1.0)
    stencil = CsrMatrix.from_coo(n, n, rows, cols, vals)
    diag_pos = stencil.diagonal_positions()

    def residual(u):
        return (stencil @ u) - h2 * lam * np.exp(u)

    def jacobian(u):
        values = stencil.values.copy()
        values[diag_pos] -= h2 * lam * np.exp(u)
        return stencil.with_values(values)

    return NonlinearProblem(
        name=f"bratu2d(grid_n={grid_n}, lam={lam:g})",
        n=n,
        residual=residual,
        jacobian=jacobian,
        initial_guess=np.zeros(n),
        exact_solution=np.zeros(n) if lam == 0.0 else None,
    )


def chandrasekhar_h(n_points: int, c: float) -> NonlinearProblem:
    """Discretized radiative-transfer H-equation on midpoint nodes
    mu_i = (i - 1/2)/n:

        R_i(H) = H_i - (1 - (c/2n) sum_j mu_i H_j / (mu_i + mu_j))^-1

    The Jacobian couples every pair of nodes (dense rows). c = 0 decouples
    the system with solution H = 1.
    """
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if not 0.0 <= c < 1.0:
        raise ValueError("c must lie in [0, 1)")
    n = n_points
    mu = (np.arange(1, n + 1) - 0.5) / n
    # kernel[i, j] = (c/2n) * mu_i / (mu_i + mu_j)
    kernel = (c / (2.0 * n)) * mu[:, None] / (mu[:, None] + mu[None, :])

    def residual(h):
        denom = 1.0 - kernel @ h
        with np.errstate(divide="ignore"):
            return h - 1.0 / denom

    def jacobian(h):
        denom = 1.0 - kernel @ h
        jac = -(denom ** -2)[:, None] * kernel
        jac[np.diag_indices(n)] += 1.0
        return CsrMatrix.from_dense(jac, drop_tol=-1.0)

    return NonlinearProblem(
        name=f"heq(n={n}, c={c:g})",
        n=n,
        residual=residual,
        jacobian=jacobian,
        initial_guess=np.ones(n),
        exact_solution=np.ones(n) if c == 0.0 else None,
    )


@dataclass(frozen=True)
class TwoPhaseBC:
    """Boundary data for the implicit saturation step: total velocity through
    the column and the water flux injected at the left face. The right face
    produces at the upwinded fractional flow."""
    velocity: float = 1.0
    inflow: float = 1.0


def frac_flow(s, mobility_ratio: float):
    """Water fractional flow with quadratic relative permeabilities."""
    s = np.asarray(s, dtype=np.float64)
    return s ** 2 / (s ** 2 + mobility_ratio * (1.0 - s) ** 2)


def frac_flow_deriv(s, mobility_ratio: float):
    s = np.asarray(s, dtype=np.float64)
    denom = s ** 2 + mobility_ratio * (1.0 - s) ** 2
    return 2.0 * mobility_ratio * s * (1.0 - s) / denom ** 2


def twophase1d(cells: int, dt: float, state_prev: np.ndarray,
               bc: TwoPhaseBC | None = None,
               mobility_ratio: float = 2.0) -> NonlinearProblem:
    """One backward-Euler step of 1-D two-phase transport: the unknowns are
    the cell saturations at the new time level, fluxes are first-order
    upwind with a fixed total velocity. Dimensionless, unit domain length.
    """
    if cells < 2:
        raise ValueError("cells must be at least 2")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if bc is None:
        bc = TwoPhaseBC()
    state_prev = np.asarray(state_prev, dtype=np.float64)
    if state_prev.shape != (cells,):
        raise ValueError("state_prev has wrong length")
    if np.any((state_prev < 0.0) | (state_prev > 1.0)):
        raise ValueError("state_prev saturations must lie in [0, 1]")
    dx = 1.0 / cells
    accum = dx / dt

    def residual(s):
        if np.any((s < -0.1) | (s > 1.1)):
            warnings.warn("saturation outside [-0.1, 1.1]", NonPhysicalStateWarning,
                          stacklevel=2)
        flux = np.empty(cells + 1)
        flux[0] = bc.inflow
        flux[1:] = bc.velocity * frac_flow(s, mobility_ratio)
        return (s - state_prev) * accum + flux[1:] - flux[:-1]

    sub_rows = np.arange(1, cells)
    diag_rows = np.arange(cells)

    def jacobian(s):
        dflux = bc.velocity * frac_flow_deriv(s, mobility_ratio)
        rows = np.concatenate([diag_rows, sub_rows])
        cols = np.concatenate([diag_rows, sub_rows - 1])
        vals = np.concatenate([accum + dflux, -dflux[:-1]])
        return CsrMatrix.from_coo(cells, cells, rows, cols, vals)

    return NonlinearProblem(
        name=f"twophase1d(cells={cells}, dt={dt:g})",
        n=cells,
        residual=residual,
        jacobian=jacobian,
        initial_guess=state_prev.copy(),
    )
