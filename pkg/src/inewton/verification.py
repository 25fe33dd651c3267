"""Numeric checks of the analysis the solver relies on.

Three instruments: a sampled check of the Taylor-remainder inequality under
a Holder condition on the Jacobian, an empirical convergence-order estimator
for iterate error sequences, and a scale-independence check for the forcing
strategies. The Holder constants are supplied analytically per problem;
estimating them from data would make the inequality check circular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forcing import (
    SCHEDULES,
    ForcingConfig,
    ForcingInputs,
    Strategy,
    next_eta,
    p_schedule,
    phi_schedule,
    scale_history,
)
from .linalg import CsrMatrix, norm2, spmv
from .problems import NonlinearProblem


@dataclass(frozen=True)
class HolderConstants:
    C: float
    alpha: float

    def __post_init__(self):
        if self.C < 0:
            raise ValueError("C must be non-negative")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")


@dataclass(frozen=True)
class Lemma1Result:
    ok: bool
    worst_margin: float   # max over samples of lhs - rhs; negative means slack
    samples: int


@dataclass(frozen=True)
class OrderEstimate:
    order: float
    window: int
    errors_used: tuple[float, ...]


def _sample_in_ball(rng, n, radius):
    direction = rng.standard_normal(n)
    direction /= norm2(direction)
    return direction * radius * rng.uniform() ** (1.0 / n)


def check_lemma1(problem: NonlinearProblem, constants: HolderConstants,
                 samples: int, seed: int = 0, slack: float = 1e-10) -> Lemma1Result:
    """Sample point pairs (u, v) in a ball around the exact solution and test

        ||R(v) - R(u) - R'(u)(v - u)||
            <= C (2||u - u*||^a + ||v - u||^a / (a + 1)) ||v - u||

    Returns ok=False as soon as any sampled pair violates the bound beyond
    the relative slack.
    """
    if problem.exact_solution is None:
        raise ValueError("check_lemma1 needs a problem with a known exact solution")
    if samples < 1:
        raise ValueError("samples must be positive")
    ustar = problem.exact_solution
    radius = 0.1 * norm2(ustar) + 0.1
    rng = np.random.default_rng(seed)
    C, alpha = constants.C, constants.alpha

    worst = -math.inf
    ok = True
    for _ in range(samples):
        u = ustar + _sample_in_ball(rng, problem.n, radius)
        v = ustar + _sample_in_ball(rng, problem.n, radius)
        step = v - u
        ru = problem.residual(u)
        rv = problem.residual(v)
        jstep = spmv(problem.jacobian(u), step)
        lhs = norm2(rv - ru - jstep)
        dist = norm2(u - ustar)
        slen = norm2(step)
        rhs = C * (2.0 * dist ** alpha + slen ** alpha / (alpha + 1.0)) * slen
        # cancellation in the remainder leaves noise of this size even when
        # the exact remainder (hence the bound) is zero, e.g. affine maps
        noise = 1e-14 * (norm2(ru) + norm2(rv) + norm2(jstep))
        worst = max(worst, lhs - rhs)
        if lhs > rhs * (1.0 + slack) + noise:
            ok = False
    return Lemma1Result(ok=ok, worst_margin=worst, samples=samples)


def estimate_order(errors, window: int) -> OrderEstimate:
    """Median of log(e_{k+1}/e_k) / log(e_k/e_{k-1}) over the trailing
    `window` errors. Requires the tail to be strictly decreasing."""
    errors = [float(e) for e in errors]
    if window < 3:
        raise ValueError("window must be at least 3")
    if len(errors) < window:
        raise ValueError("need at least `window` errors")
    tail = errors[-window:]
    if any(e <= 0 for e in tail):
        raise ValueError("errors must be positive")
    if any(b >= a for a, b in zip(tail, tail[1:])):
        raise ValueError("order undefined: trailing errors are not strictly decreasing")
    qs = [math.log(tail[k + 1] / tail[k]) / math.log(tail[k] / tail[k - 1])
          for k in range(1, window - 1)]
    return OrderEstimate(order=float(np.median(qs)), window=window,
                         errors_used=tuple(tail))


def errors_from_report(report, exact_solution=None) -> list[float]:
    """Error sequence for order estimation: true iterate errors when the
    exact solution is known, residual norms otherwise (the two are
    norm-equivalent near a root with a nonsingular Jacobian)."""
    if exact_solution is not None:
        seq = [rec.error_norm for rec in report.iterations]
        if any(e is None for e in seq):
            raise ValueError("report carries no iterate errors; was the "
                             "problem built without an exact solution?")
        seq.append(norm2(report.solution - exact_solution))
        return seq
    seq = [rec.res_norm for rec in report.iterations]
    seq.append(report.final_res_norm)
    return seq


def synthetic_error_sequence(e0: float, order: float, count: int,
                             ratio: float = 0.1) -> list[float]:
    """Generate errors with a known convergence order: geometric decay with
    the given ratio for order 1, else e_{k+1} = e_k^order."""
    errors = [e0]
    for _ in range(count - 1):
        errors.append(errors[-1] * ratio if order == 1.0
                      else errors[-1] ** order)
    return errors


def check_scale_independence(strategy: Strategy, fcfg: ForcingConfig,
                             scenario: ForcingInputs,
                             scales=(1e-6, 1.0, 1e6),
                             rel_tol: float = 1e-14) -> bool:
    """True when next_eta is invariant (to rel_tol) under multiplying every
    norm in the scenario by each scale factor."""
    base = next_eta(strategy, fcfg, scenario)
    for s in scales:
        eta = next_eta(strategy, fcfg, scale_history(scenario, s))
        if abs(eta - base) > rel_tol * abs(base):
            return False
    return True


def p_schedule_shapes_ok(cfg: ForcingConfig, nu_max: int = 100):
    """Shape check for the variable coefficients: the exponent schedules are
    non-decreasing within [1, 2], the coefficient schedules non-increasing
    within [eps0, phi0], and the steep variants are within 1e-3 of their
    limits by nu = 10."""
    problems = []
    for schedule in SCHEDULES:
        ps = [p_schedule(schedule, nu) for nu in range(1, nu_max + 1)]
        if any(not 1.0 <= v <= 2.0 for v in ps):
            problems.append(f"p[{schedule}] leaves [1, 2]")
        if any(b < a for a, b in zip(ps, ps[1:])):
            problems.append(f"p[{schedule}] not non-decreasing")
        fs = [phi_schedule(schedule, nu, cfg) for nu in range(1, nu_max + 1)]
        if any(not cfg.eps0 <= v <= cfg.phi0 for v in fs):
            problems.append(f"phi[{schedule}] leaves [eps0, phi0]")
        if any(b > a for a, b in zip(fs, fs[1:])):
            problems.append(f"phi[{schedule}] not non-increasing")
    if abs(p_schedule("steep", 10) - 2.0) > 1e-3:
        problems.append("p[steep] not settled by nu = 10")
    if abs(phi_schedule("steep", 10, cfg) - cfg.eps0) > 1e-3:
        problems.append("phi[steep] not settled by nu = 10")
    if problems:
        return False, "; ".join(problems)
    return True, f"all schedules shaped correctly over nu = 1..{nu_max}"


def make_affine_problem(n: int = 6, seed: int = 0) -> NonlinearProblem:
    """Diagonally dominant affine map R(u) = A u - b with known root;
    zero curvature, so the Lemma-1 left side vanishes identically."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(n, n))
    a[np.diag_indices(n)] = n + rng.uniform(1.0, 2.0, size=n)
    A = CsrMatrix.from_dense(a, drop_tol=-1.0)
    ustar = rng.uniform(-1.0, 1.0, size=n)
    b = spmv(A, ustar)
    return NonlinearProblem(
        name=f"affine(n={n})",
        n=n,
        residual=lambda u: spmv(A, u) - b,
        jacobian=lambda u: A,
        initial_guess=np.zeros(n),
        exact_solution=ustar,
    )


def make_quadratic_problem(n: int = 4, seed: int = 0) -> NonlinearProblem:
    """Componentwise quadratic map R_i(u) = u_i^2 - t_i^2 with root t.
    The Jacobian 2 diag(u) is Lipschitz with constant 2, so
    HolderConstants(2, 1) is analytically valid."""
    rng = np.random.default_rng(seed)
    target = rng.uniform(1.5, 2.5, size=n)

    def jacobian(u):
        idx = np.arange(n, dtype=np.int64)
        return CsrMatrix(n, n, np.arange(n + 1, dtype=np.int64), idx, 2.0 * u)

    return NonlinearProblem(
        name=f"quadratic(n={n})",
        n=n,
        residual=lambda u: u ** 2 - target ** 2,
        jacobian=jacobian,
        initial_guess=np.full(n, 2.0),
        exact_solution=target,
    )
