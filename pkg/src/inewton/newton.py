"""Inexact Newton driver.

Each outer iteration evaluates the residual, asks the forcing strategy for
eta, solves the Newton equation with GMRES to that relative tolerance and
takes the full step (no line search or damping; divergence is reported to
the caller). The driver also keeps the exact bookkeeping the adaptive
strategies need: linear-model residual, disagreement with the model at the
next iterate, and achieved/predicted reduction, each computed from one extra
matrix-vector product with the retained Jacobian rather than from solver
recurrence estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forcing import ForcingConfig, ForcingInputs, Strategy, next_eta
from .krylov import KrylovConfig, gmres_solve
from .linalg import ZeroPivotError, ilu0_factorize, norm2, spmv
from .problems import NonlinearProblem


@dataclass(frozen=True)
class NewtonConfig:
    rtol: float = 1e-8            # relative to the initial residual norm
    atol: float = 1e-12           # absolute floor for tiny initial residuals
    max_outer: int = 30
    probe_oversolving: bool = False

    def __post_init__(self):
        if not 0.0 < self.rtol < 1.0:
            raise ValueError("rtol must lie in (0, 1)")
        if self.atol < 0.0:
            raise ValueError("atol must be non-negative")
        if self.max_outer < 1:
            raise ValueError("max_outer must be positive")


@dataclass
class OuterIterRecord:
    nu: int
    res_norm: float
    eta_used: float
    inner_iterations: int
    linear_model_residual_norm: float   # ||R + R' delta||, recomputed exactly
    disagreement_norm: float            # ||R(u+delta) - R - R' delta||
    actual_reduction: float             # ||R|| - ||R(u+delta)||
    predicted_reduction: float          # ||R|| - ||R + R' delta||
    residual_change_norm: float         # ||R(u+delta) - R||
    error_norm: float | None = None     # ||u - u*|| when the exact solution is known
    oversolving_trace: list[tuple[float, float]] | None = None


@dataclass
class NewtonReport:
    converged: bool
    iterations: list[OuterIterRecord]
    total_inner: int
    total_outer: int
    final_res_norm: float
    solution: np.ndarray
    failure_reason: str | None = None


def linear_nonlinear_trace(problem, u, A, b, iterates):
    """Evaluate, for each inner-solver iterate delta_j, the true relative
    linear residual and the nonlinear residual norm at u + delta_j."""
    bnorm = norm2(b)
    trace = []
    for delta in iterates:
        lin = norm2(b - spmv(A, delta)) / bnorm
        nonlin = norm2(problem.residual(u + delta))
        trace.append((lin, nonlin))
    return trace


def oversolve_probe(problem, u, A, b, eta, M, kcfg: KrylovConfig):
    """Rerun the inner solve for the linearization (A, b) at state u,
    recording the iterate after every inner iteration, and return the
    (linear relative residual, nonlinear residual norm) pairs. Costs one
    residual evaluation per inner iteration; intended for diagnostics."""
    result = gmres_solve(A, b, eta, M, kcfg, record_iterates=True)
    return linear_nonlinear_trace(problem, u, A, b, result.iterates)


def solve(problem: NonlinearProblem, u0, strategy: Strategy,
          fcfg: ForcingConfig | None = None,
          ncfg: NewtonConfig | None = None,
          kcfg: KrylovConfig | None = None) -> NewtonReport:
    """Run the inexact Newton iteration from u0 until the residual norm
    drops below max(rtol * ||R(u0)||, atol) or max_outer is exhausted."""
    fcfg = fcfg or ForcingConfig()
    ncfg = ncfg or NewtonConfig()
    kcfg = kcfg or KrylovConfig()

    u = np.array(u0, dtype=np.float64, copy=True)
    if u.shape != (problem.n,):
        raise ValueError("initial guess has wrong length")

    records: list[OuterIterRecord] = []
    total_inner = 0
    history: dict = {}

    def report(converged, final_norm, reason=None):
        return NewtonReport(
            converged=converged,
            iterations=records,
            total_inner=total_inner,
            total_outer=len(records),
            final_res_norm=final_norm,
            solution=u,
            failure_reason=reason,
        )

    R = problem.residual(u)
    if not np.all(np.isfinite(R)):
        return report(False, float("inf"), "residual not finite at initial guess")
    tol = max(ncfg.rtol * norm2(R), ncfg.atol)

    nu = 0
    while True:
        rnorm = norm2(R)
        if rnorm <= tol:
            return report(True, rnorm)
        if nu >= ncfg.max_outer:
            return report(False, rnorm, "max_outer exhausted")

        eta = next_eta(strategy, fcfg, ForcingInputs(nu=nu, res_norm_current=rnorm,
                                                     **history))
        J = problem.jacobian(u)
        if kcfg.preconditioner == "ilu0":
            try:
                M = ilu0_factorize(J)
            except ZeroPivotError as exc:
                return report(False, rnorm,
                              f"preconditioner failed at outer iteration {nu}: {exc}")
        else:
            M = None
        b = -R
        result = gmres_solve(J, b, eta, M, kcfg,
                             record_iterates=ncfg.probe_oversolving)
        total_inner += result.iterations
        if not result.converged:
            return report(False, rnorm,
                          f"inner solver stalled at outer iteration {nu}")

        delta = result.solution
        model_vec = R + spmv(J, delta)
        lin_norm = norm2(model_vec)

        u_new = u + delta
        R_new = problem.residual(u_new)
        if not np.all(np.isfinite(R_new)):
            return report(False, rnorm,
                          f"residual not finite at outer iteration {nu}")
        rnorm_new = norm2(R_new)

        trace = None
        if ncfg.probe_oversolving:
            trace = linear_nonlinear_trace(problem, u, J, b, result.iterates)

        rec = OuterIterRecord(
            nu=nu,
            res_norm=rnorm,
            eta_used=eta,
            inner_iterations=result.iterations,
            linear_model_residual_norm=lin_norm,
            disagreement_norm=norm2(R_new - model_vec),
            actual_reduction=rnorm - rnorm_new,
            predicted_reduction=rnorm - lin_norm,
            residual_change_norm=norm2(R_new - R),
            error_norm=(norm2(u - problem.exact_solution)
                        if problem.exact_solution is not None else None),
            oversolving_trace=trace,
        )
        records.append(rec)
        history = dict(
            res_norm_prev=rnorm,
            linear_model_residual_norm_prev=lin_norm,
            disagreement_norm_prev=rec.disagreement_norm,
            actual_reduction_prev=rec.actual_reduction,
            predicted_reduction_prev=rec.predicted_reduction,
            residual_change_norm_prev=rec.residual_change_norm,
            eta_prev=eta,
        )
        u = u_new
        R = R_new
        nu += 1
