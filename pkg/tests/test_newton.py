from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from inewton import (
    CsrMatrix,
    ForcingConfig,
    KrylovConfig,
    NewtonConfig,
    NonlinearProblem,
    bratu2d,
    newton_solve,
    norm2,
    oversolve_probe,
    parse_strategy,
)
from inewton.verification import make_affine_problem

UNPREC = KrylovConfig(preconditioner="none")


def scalar_problem(u0=3.0):
    return NonlinearProblem(
        name="scalar_square",
        n=1,
        residual=lambda u: u * u - 4.0,
        jacobian=lambda u: CsrMatrix.from_dense([[2.0 * u[0]]]),
        initial_guess=np.array([u0]),
        exact_solution=np.array([2.0]),
    )


def test_scalar_newton_matches_analytic_recurrence():
    # exact Newton on u^2 - 4 from 3: u <- (u^2 + 4) / (2u)
    expected = [Fraction(3)]
    for _ in range(3):
        u = expected[-1]
        expected.append((u * u + 4) / (2 * u))
    assert expected[1] == Fraction(13, 6)
    assert expected[2] == Fraction(313, 156)

    rep = newton_solve(scalar_problem(), np.array([3.0]),
                       parse_strategy("fixed:1e-12"), ForcingConfig(),
                       NewtonConfig(rtol=1e-14, atol=1e-14), UNPREC)
    assert rep.converged
    iterate_residuals = [rec.res_norm for rec in rep.iterations]
    for k, frac in enumerate(expected[:3]):
        want = abs(float(frac) ** 2 - 4.0)
        assert iterate_residuals[k] == pytest.approx(want, rel=1e-10)
    assert rep.solution[0] == pytest.approx(2.0, abs=1e-12)


def test_affine_problem_one_outer_iteration():
    problem = make_affine_problem(n=8, seed=3)
    rep = newton_solve(problem, problem.initial_guess + 2.0,
                       parse_strategy("fixed:1e-10"), ForcingConfig(),
                       NewtonConfig(rtol=1e-8), UNPREC)
    assert rep.converged
    assert rep.total_outer == 1
    assert_allclose(rep.solution, problem.exact_solution, rtol=1e-8)


@pytest.mark.parametrize("label", ["fixed:1e-6", "ew1", "ew2", "an", "botti",
                                   "brownsaad", "inex1steep", "inex2steep"])
def test_inexact_newton_condition_every_iteration(label):
    problem = bratu2d(10, 3.0)
    ncfg = NewtonConfig(rtol=1e-10, atol=1e-13)
    rep = newton_solve(problem, problem.initial_guess, parse_strategy(label),
                       ForcingConfig(), ncfg, KrylovConfig())
    assert rep.converged
    for rec in rep.iterations:
        bound = rec.eta_used * rec.res_norm * (1 + 1e-8) + ncfg.atol
        assert rec.linear_model_residual_norm <= bound


def test_predicted_reduction_positive_on_converged_solves():
    problem = bratu2d(10, 2.0)
    rep = newton_solve(problem, problem.initial_guess, parse_strategy("ew2"),
                       ForcingConfig(), NewtonConfig(rtol=1e-9), KrylovConfig())
    assert rep.converged
    assert all(rec.predicted_reduction > 0 for rec in rep.iterations)


def test_quadratic_error_contraction_near_root():
    problem = scalar_problem(u0=2.5)
    rep = newton_solve(problem, problem.initial_guess,
                       parse_strategy("fixed:1e-12"), ForcingConfig(),
                       NewtonConfig(rtol=1e-14, atol=1e-15), UNPREC)
    errors = [rec.error_norm for rec in rep.iterations]
    errors.append(norm2(rep.solution - problem.exact_solution))
    # e_{k+1} <= K e_k^2 over the last three steps; K = 1/(2 u*) * margin
    for e_prev, e_next in zip(errors[-4:-1], errors[-3:]):
        assert e_next <= 0.5 * e_prev ** 2 * (1 + 1e-6) + 1e-15


@pytest.mark.parametrize("label", ["fixed:1e-6", "ew1", "ew2", "an", "botti",
                                   "brownsaad", "inex1steep", "inex1exp",
                                   "inex1cub", "inex2steep", "inex2exp",
                                   "inex2cub"])
def test_monotone_residual_near_convergence_on_bratu(label):
    problem = bratu2d(12, 2.0)
    rep = newton_solve(problem, problem.initial_guess, parse_strategy(label),
                       ForcingConfig(), NewtonConfig(rtol=1e-11, max_outer=60),
                       KrylovConfig())
    assert rep.converged
    norms = [rec.res_norm for rec in rep.iterations] + [rep.final_res_norm]
    r0 = norms[0]
    tail = [r for r in norms if r < 1e-3 * r0]
    assert all(b < a for a, b in zip(tail, tail[1:]))


def test_determinism():
    problem = bratu2d(10, 2.0)
    runs = [newton_solve(problem, problem.initial_guess, parse_strategy("ew1"),
                         ForcingConfig(), NewtonConfig(rtol=1e-10), KrylovConfig())
            for _ in range(2)]
    a, b = runs
    assert a.total_inner == b.total_inner
    assert a.total_outer == b.total_outer
    assert [r.res_norm for r in a.iterations] == [r.res_norm for r in b.iterations]
    assert [r.eta_used for r in a.iterations] == [r.eta_used for r in b.iterations]
    assert_allclose(a.solution, b.solution, rtol=0, atol=0)


def test_report_totals_consistent():
    problem = bratu2d(10, 2.0)
    ncfg = NewtonConfig(rtol=1e-9, atol=1e-13)
    rep = newton_solve(problem, problem.initial_guess, parse_strategy("ew2"),
                       ForcingConfig(), ncfg, KrylovConfig())
    assert rep.converged
    assert rep.total_inner == sum(rec.inner_iterations for rec in rep.iterations)
    assert rep.total_outer == len(rep.iterations)
    r0 = rep.iterations[0].res_norm
    assert rep.final_res_norm <= max(ncfg.rtol * r0, ncfg.atol)


def test_preconditioner_failure_becomes_failure_report():
    problem = NonlinearProblem(
        name="singular_jacobian", n=2,
        residual=lambda u: np.array([u[0] + u[1] - 1.0, u[0] + u[1] - 1.0]),
        jacobian=lambda u: CsrMatrix.from_dense([[1.0, 1.0], [1.0, 1.0]]),
        initial_guess=np.zeros(2))
    rep = newton_solve(problem, problem.initial_guess, parse_strategy("fixed:1e-8"),
                       ForcingConfig(), NewtonConfig(rtol=1e-10), KrylovConfig())
    assert not rep.converged
    assert "preconditioner failed" in rep.failure_reason


def test_max_outer_exhaustion_reported():
    problem = bratu2d(10, 3.0)
    rep = newton_solve(problem, problem.initial_guess, parse_strategy("fixed:1e-6"),
                       ForcingConfig(), NewtonConfig(rtol=1e-12, max_outer=2),
                       KrylovConfig())
    assert not rep.converged
    assert rep.failure_reason == "max_outer exhausted"
    assert rep.total_outer == 2


def test_nonfinite_residual_fails_fast():
    problem = NonlinearProblem(
        name="blowup", n=1,
        residual=lambda u: np.array([np.inf if u[0] > 2.5 else u[0] - 3.0]),
        jacobian=lambda u: CsrMatrix.from_dense([[1.0]]),
        initial_guess=np.array([0.0]))
    rep = newton_solve(problem, problem.initial_guess, parse_strategy("fixed:1e-8"),
                       ForcingConfig(), NewtonConfig(rtol=1e-10), UNPREC)
    assert not rep.converged
    assert "not finite" in rep.failure_reason


def test_inner_solver_stall_reported():
    problem = bratu2d(10, 2.0)
    kcfg = KrylovConfig(max_iters=1, restart=1, preconditioner="none")
    rep = newton_solve(problem, problem.initial_guess, parse_strategy("fixed:1e-10"),
                       ForcingConfig(), NewtonConfig(rtol=1e-10), kcfg)
    assert not rep.converged
    assert "stalled" in rep.failure_reason


def test_zero_initial_residual_converges_immediately():
    problem = scalar_problem()
    rep = newton_solve(problem, np.array([2.0]), parse_strategy("ew1"),
                       ForcingConfig(), NewtonConfig(rtol=1e-8, atol=1e-12), UNPREC)
    assert rep.converged
    assert rep.total_outer == 0


class TestOversolveProbe:
    def test_affine_identity(self):
        problem = make_affine_problem(n=12, seed=7)
        u = problem.initial_guess + 1.5
        R = problem.residual(u)
        A = problem.jacobian(u)
        b = -R
        trace = oversolve_probe(problem, u, A, b, 1e-8, None, UNPREC)
        assert len(trace) >= 2
        bnorm = norm2(b)
        for lin_rel, nonlin in trace:
            # affine map: R(u + d) = R(u) + A d = -(b - A d) exactly
            assert nonlin == pytest.approx(lin_rel * bnorm, rel=1e-10)

    def test_loose_eta_gives_shorter_trace(self):
        problem = bratu2d(10, 4.0)
        u = problem.initial_guess
        A = problem.jacobian(u)
        b = -problem.residual(u)
        tight = oversolve_probe(problem, u, A, b, 1e-6, None, UNPREC)
        loose = oversolve_probe(problem, u, A, b, 1e-1, None, UNPREC)
        assert len(loose) < len(tight)

    def test_probe_recorded_in_report(self):
        problem = bratu2d(8, 2.0)
        rep = newton_solve(problem, problem.initial_guess,
                           parse_strategy("fixed:1e-8"), ForcingConfig(),
                           NewtonConfig(rtol=1e-8, probe_oversolving=True),
                           KrylovConfig())
        assert rep.converged
        for rec in rep.iterations:
            assert rec.oversolving_trace is not None
            assert len(rec.oversolving_trace) == rec.inner_iterations

    def test_probe_off_by_default(self):
        problem = bratu2d(8, 2.0)
        rep = newton_solve(problem, problem.initial_guess,
                           parse_strategy("fixed:1e-8"), ForcingConfig(),
                           NewtonConfig(rtol=1e-8), KrylovConfig())
        assert all(rec.oversolving_trace is None for rec in rep.iterations)


def test_config_validation():
    with pytest.raises(ValueError):
        NewtonConfig(rtol=1.5)
    with pytest.raises(ValueError):
        NewtonConfig(atol=-1.0)
    with pytest.raises(ValueError):
        NewtonConfig(max_outer=0)
