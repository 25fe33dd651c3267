import numpy as np
import pytest
from numpy.testing import assert_allclose

from inewton import CsrMatrix, KrylovConfig, gmres_solve, identity, ilu0_factorize, norm2
from conftest import laplacian1d, random_sparse

UNPREC = KrylovConfig(preconditioner="none")


def test_identity_system_one_iteration():
    b = np.array([3.0, -1.0, 2.0])
    res = gmres_solve(identity(3), b, 1e-10, None, UNPREC)
    assert res.converged
    assert res.iterations == 1
    assert_allclose(res.solution, b, rtol=1e-12)


def test_diagonal_system_two_iterations():
    A = CsrMatrix.from_dense(np.diag([1.0, 2.0]))
    res = gmres_solve(A, np.array([1.0, 2.0]), 1e-12, None, UNPREC)
    assert res.converged
    assert res.iterations <= 2
    assert_allclose(res.solution, [1.0, 1.0], rtol=1e-10)


def test_laplacian_posthoc_residual():
    A = laplacian1d(50)
    b = np.ones(50)
    res = gmres_solve(A, b, 1e-8, None, UNPREC)
    assert res.converged
    assert norm2(b - A @ res.solution) / norm2(b) <= 1e-8


def test_zero_rhs_short_circuits():
    res = gmres_solve(laplacian1d(5), np.zeros(5), 1e-8, None, UNPREC)
    assert res.converged
    assert res.iterations == 0
    assert_allclose(res.solution, np.zeros(5))


def test_monotone_cost_in_tolerance():
    A = laplacian1d(40)
    b = np.linspace(1.0, 2.0, 40)
    iters = [gmres_solve(A, b, eta, None, UNPREC).iterations
             for eta in (1e-10, 1e-6, 1e-3, 1e-1)]
    assert iters == sorted(iters, reverse=True)


def test_converges_within_n_iterations_without_restart(rng):
    for n in (10, 30, 50):
        A = random_sparse(rng, n, density=0.4, diag_boost=5.0)
        b = rng.standard_normal(n)
        cfg = KrylovConfig(max_iters=n, restart=n, preconditioner="none")
        res = gmres_solve(A, b, 1e-10, None, cfg)
        assert res.converged
        assert res.iterations <= n


def test_true_residual_matches_recurrence(rng):
    A = random_sparse(rng, 30, density=0.4, diag_boost=6.0)
    b = rng.standard_normal(30)
    res = gmres_solve(A, b, 1e-6, None, UNPREC)
    true_rel = norm2(b - A @ res.solution) / norm2(b)
    assert abs(true_rel - res.relative_residual_history[-1]) <= 1e-8 * max(true_rel, 1e-12)


def test_history_non_increasing_within_restart_cycles(rng):
    A = laplacian1d(60)
    b = rng.standard_normal(60)
    cfg = KrylovConfig(max_iters=2000, restart=10, preconditioner="none")
    res = gmres_solve(A, b, 1e-9, None, cfg)
    assert res.converged
    hist = res.relative_residual_history
    assert sum(res.cycle_lengths) == len(hist)
    start = 0
    for length in res.cycle_lengths:
        cycle = hist[start:start + length]
        assert all(b2 <= a2 * (1 + 1e-12) for a2, b2 in zip(cycle, cycle[1:]))
        start += length


def test_restarted_solve_still_converges():
    A = laplacian1d(40)
    b = np.ones(40)
    cfg = KrylovConfig(max_iters=400, restart=20, preconditioner="none")
    res = gmres_solve(A, b, 1e-8, None, cfg)
    assert res.converged
    assert len(res.cycle_lengths) >= 1
    assert norm2(b - A @ res.solution) / norm2(b) <= 1e-8


def test_ilu0_preconditioning_reduces_iterations(rng):
    A = random_sparse(rng, 40, density=0.2, diag_boost=4.0)
    b = rng.standard_normal(40)
    plain = gmres_solve(A, b, 1e-10, None, UNPREC)
    prec = gmres_solve(A, b, 1e-10, ilu0_factorize(A), UNPREC)
    assert prec.converged
    assert prec.iterations < plain.iterations
    assert norm2(b - A @ prec.solution) / norm2(b) <= 1e-10


def test_max_iters_exhaustion_returns_best_iterate():
    A = laplacian1d(50)
    b = np.ones(50)
    cfg = KrylovConfig(max_iters=3, restart=3, preconditioner="none")
    res = gmres_solve(A, b, 1e-12, None, cfg)
    assert not res.converged
    assert res.iterations == 3
    # best iterate still reduces the residual
    assert norm2(b - A @ res.solution) < norm2(b)


def test_record_iterates_final_matches_solution(rng):
    A = random_sparse(rng, 25, density=0.4, diag_boost=5.0)
    b = rng.standard_normal(25)
    res = gmres_solve(A, b, 1e-9, None, UNPREC, record_iterates=True)
    assert res.converged
    assert len(res.iterates) == res.iterations
    assert_allclose(res.iterates[-1], res.solution, atol=1e-12)


def test_recorded_iterates_match_history(rng):
    A = laplacian1d(30)
    b = rng.standard_normal(30)
    res = gmres_solve(A, b, 1e-8, None, UNPREC, record_iterates=True)
    bnorm = norm2(b)
    for delta, rel in zip(res.iterates, res.relative_residual_history):
        true_rel = norm2(b - A @ delta) / bnorm
        assert abs(true_rel - rel) <= 1e-8 + 1e-6 * rel


def test_eta_validation():
    with pytest.raises(ValueError, match="eta"):
        gmres_solve(identity(2), np.ones(2), 1.0, None, UNPREC)


def test_rectangular_rejected():
    A = CsrMatrix(2, 3, [0, 1, 2], [0, 1], [1.0, 1.0])
    with pytest.raises(ValueError, match="square"):
        gmres_solve(A, np.ones(2), 0.1, None, UNPREC)


def test_config_validation():
    with pytest.raises(ValueError, match="restart"):
        KrylovConfig(max_iters=10, restart=20)
    with pytest.raises(ValueError, match="preconditioner"):
        KrylovConfig(preconditioner="jacobi")
