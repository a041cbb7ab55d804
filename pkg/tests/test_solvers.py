import numpy as np
import pytest

from quatpinv.errors import Breakdown, DimensionMismatch, Divergence
from quatpinv.factor import pinv_normal_eq
from quatpinv.qmatrix import QMatrix, op_norm_est, randn_qmat
from quatpinv.solvers import (SCHEDULE_BINARY, SCHEDULE_NAIVE, SCHEDULE_PS,
                              ProductCounter, SketchConfig, SolverConfig,
                              auto_alpha, cgne_q, eval_neumann_poly,
                              hybrid_rsp_ns, ns_damped, ns_hyperpower,
                              penrose_residuals, recurrence_deviations,
                              rsp_column, rsp_rate_bound, rsp_rate_check,
                              rsp_row, _rsp_col_step)
from quatpinv.rng import QuatRNG


def scalar(x: float) -> QMatrix:
    return QMatrix.from_real(np.array([[x]]))


# ---------------------------------------------------------------------------
# Penrose residuals
# ---------------------------------------------------------------------------

def test_penrose_exact_inverse():
    assert penrose_residuals(scalar(2.0), scalar(0.5)) == (0.0, 0.0, 0.0, 0.0)


def test_penrose_wrong_candidate():
    e = penrose_residuals(scalar(2.0), scalar(1.0))
    # e1 = ||XAX - X|| = 1, e2 = ||AXA - A|| = 2; projectors stay Hermitian
    assert e[0] == pytest.approx(1.0)
    assert e[1] == pytest.approx(2.0)
    assert e[2] == 0.0 and e[3] == 0.0


def test_penrose_shape_check():
    with pytest.raises(DimensionMismatch):
        penrose_residuals(randn_qmat(3, 2, 0), randn_qmat(3, 2, 0))


# ---------------------------------------------------------------------------
# Newton-Schulz
# ---------------------------------------------------------------------------

def test_ns_scalar_exact_start():
    # A = [2], alpha = 0.25: X0 = 0.5 = A+, F0 = 0, done at iteration 0
    X, rep = ns_damped(scalar(2.0), SolverConfig(alpha=0.25))
    assert rep.converged and rep.iterations == 0
    assert X[0, 0].a == pytest.approx(0.5)


def test_ns_scalar_damped_residual():
    # t0 = 0.5, gamma = 0.5: next residual g(t0) = (1-g)t0 + g t0^2 = 0.375
    X, rep = ns_damped(scalar(2.0), SolverConfig(alpha=0.125, gamma=0.5,
                                                 tol=0.0, maxit=1))
    assert rep.residual_history[0][1] == pytest.approx(0.5)
    assert rep.residual_history[1][1] == pytest.approx(0.375)


def test_auto_alpha_initial_contraction():
    for seed in range(50):
        m, n = (12, 7) if seed % 2 else (7, 12)
        A = randn_qmat(m, n, seed)
        alpha = auto_alpha(A)
        X0 = A.adjoint().scale(alpha)
        F = (QMatrix.identity(n) - X0 @ A) if m >= n \
            else (QMatrix.identity(m) - A @ X0)
        assert op_norm_est(F) < 1.0


@pytest.mark.parametrize("gamma", [0.5, 1.0])
def test_ns_recurrence_exact(gamma):
    A = randn_qmat(10, 6, 0)
    devs = recurrence_deviations(A, SolverConfig(gamma=gamma), "ns", steps=10)
    assert max(d for _, d in devs) <= 1e-12


@pytest.mark.parametrize("p", [2, 3, 4, 8])
def test_hyperpower_recurrence_exact(p):
    A = randn_qmat(10, 6, 0)
    devs = recurrence_deviations(A, SolverConfig(order=p), "hyperpower",
                                 steps=5)
    assert max(d for _, d in devs) <= 1e-12


def test_hyperpower_p2_matches_ns_bitwise():
    A = randn_qmat(9, 5, 1)
    cfg = SolverConfig(tol=1e-12, maxit=30)
    X1, _ = ns_damped(A, cfg)
    X2, _ = ns_hyperpower(A, cfg)
    assert np.array_equal(X1.data, X2.data)


def test_ns_converges_to_projectors():
    A = randn_qmat(12, 7, 2)
    X, rep = ns_damped(A, SolverConfig(tol=1e-12, maxit=60))
    assert rep.converged
    P = A @ X          # range projector AA+
    Q = X @ A          # = I_n at full column rank
    assert (P @ P - P).fro_norm() <= 1e-10
    assert (Q - QMatrix.identity(7)).fro_norm() <= 1e-10


def test_ns_divergence_detector():
    A = randn_qmat(6, 4, 3)
    with pytest.raises(Divergence):
        ns_damped(A, SolverConfig(alpha=50.0, maxit=100))


def test_ns_deterministic():
    cfg = SolverConfig(maxit=20, tol=1e-10)
    X1, _ = ns_damped(randn_qmat(8, 5, 4), cfg)
    X2, _ = ns_damped(randn_qmat(8, 5, 4), cfg)
    assert np.array_equal(X1.data, X2.data)


# ---------------------------------------------------------------------------
# polynomial schedules
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 4, 8, 16])
def test_schedules_agree(p):
    R = randn_qmat(6, 6, 5).scale(0.05)
    X = randn_qmat(6, 4, 6)
    Y0 = eval_neumann_poly(R, X, p, SCHEDULE_NAIVE)
    Y2 = eval_neumann_poly(R, X, p, SCHEDULE_PS)
    assert (Y0 - Y2).fro_norm() <= 1e-11 * max(Y0.fro_norm(), 1.0)
    if p & (p - 1) == 0:
        Y1 = eval_neumann_poly(R, X, p, SCHEDULE_BINARY)
        assert (Y0 - Y1).fro_norm() <= 1e-11 * max(Y0.fro_norm(), 1.0)


@pytest.mark.parametrize("p,expected", [(8, 2), (16, 3)])
def test_binary_schedule_product_count(p, expected):
    R = randn_qmat(5, 5, 7).scale(0.1)
    X = randn_qmat(5, 3, 8)
    counter = ProductCounter()
    eval_neumann_poly(R, X, p, SCHEDULE_BINARY, counter=counter)
    assert counter.s_products == expected


def test_hyperpower_residual_power_bound():
    # one order-p step maps ||F|| to at most ||F||^p (plus roundoff)
    A = randn_qmat(10, 6, 9)
    cfg = SolverConfig(order=4, tol=0.0, maxit=1)
    _, rep = ns_hyperpower(A, cfg)
    t0 = rep.residual_history[0][1]
    t1 = rep.residual_history[1][1]
    assert t1 <= t0 ** 4 + 1e-10


# ---------------------------------------------------------------------------
# sketch-and-project
# ---------------------------------------------------------------------------

def test_rsp_full_sketch_one_step():
    A = randn_qmat(9, 4, 10)
    cfg = SolverConfig(tol=1e-10, maxit=3)
    sk = SketchConfig(block_r=4, seed=0)
    X, rep = rsp_column(A, cfg, sk)
    assert rep.converged and rep.iterations <= 1
    assert (X @ A - QMatrix.identity(4)).fro_norm() <= 1e-9


def test_rsp_fixed_point():
    A = randn_qmat(8, 3, 11)
    Xstar = pinv_normal_eq(A)
    X1 = _rsp_col_step(A, Xstar, SketchConfig(block_r=2, seed=1), QuatRNG(1))
    assert (X1 - Xstar).fro_norm() <= 1e-10 * Xstar.fro_norm()


def test_rsp_monotone_error():
    A = randn_qmat(30, 10, 12)
    Xstar = pinv_normal_eq(A)
    sk = SketchConfig(block_r=4, seed=2)
    rng = QuatRNG(2)
    X = A.adjoint().scale(auto_alpha(A))
    prev = (X - Xstar).fro_norm()
    for _ in range(200):
        X = _rsp_col_step(A, X, sk, rng)
        cur = (X - Xstar).fro_norm()
        assert cur <= prev * (1 + 1e-12)
        prev = cur


def test_rsp_row_example():
    A = QMatrix.from_real(np.array([[1.0, 0.0]]))
    cfg = SolverConfig(tol=1e-10, maxit=3)
    X, rep = rsp_row(A, cfg, SketchConfig(block_r=1, test_s=2, seed=0))
    assert rep.converged
    assert (X - QMatrix.from_real(np.array([[1.0], [0.0]]))).fro_norm() <= 1e-9


def test_rsp_gram_path_matches_qr_path():
    A = randn_qmat(10, 5, 13)
    X = A.adjoint().scale(auto_alpha(A))
    X1 = _rsp_col_step(A, X, SketchConfig(block_r=3, seed=3), QuatRNG(3))
    X2 = _rsp_col_step(A, X, SketchConfig(block_r=3, seed=3, gram_path=True),
                       QuatRNG(3))
    assert (X1 - X2).fro_norm() <= 1e-8 * max(X1.fro_norm(), 1.0)


def test_rsp_side_preconditions():
    with pytest.raises(DimensionMismatch):
        rsp_column(randn_qmat(3, 5, 0), SolverConfig(), SketchConfig(block_r=2))
    with pytest.raises(DimensionMismatch):
        rsp_row(randn_qmat(5, 3, 0), SolverConfig(), SketchConfig(block_r=2))


def test_rsp_rate_bound_and_check():
    A = randn_qmat(30, 10, 14)
    sk = SketchConfig(block_r=4, seed=4)
    bound = rsp_rate_bound(A, sk.block_r)
    assert 0.0 < bound < 1.0
    mean = rsp_rate_check(A, sk, trials=50)
    assert mean <= bound + 0.1   # loose here; acceptance pins 3*SE


def test_rsp_full_sketch_rate_zero():
    A = randn_qmat(12, 4, 15)
    mean = rsp_rate_check(A, SketchConfig(block_r=4, seed=5), trials=5)
    assert mean <= 1e-16


# ---------------------------------------------------------------------------
# hybrid
# ---------------------------------------------------------------------------

def test_hybrid_degenerate_matches_hyperpower():
    # T = 0 randomized steps per cycle leaves only the exact correction
    A = randn_qmat(10, 6, 16)
    cfg = SolverConfig(order=4, tol=1e-12, maxit=10)
    X1, _ = hybrid_rsp_ns(A, cfg, SketchConfig(cycle_T=0, seed=0))
    X2, _ = ns_hyperpower(A, SolverConfig(order=4, schedule=SCHEDULE_PS,
                                          tol=1e-12, maxit=10))
    assert (X1 - X2).fro_norm() <= 1e-12 * max(X2.fro_norm(), 1.0)


def test_hybrid_converges():
    A = randn_qmat(20, 8, 17)
    X, rep = hybrid_rsp_ns(A, SolverConfig(order=4, tol=1e-10, maxit=20),
                           SketchConfig(block_r=4, cycle_T=5, seed=1))
    assert rep.converged
    assert max(penrose_residuals(A, X)) <= 1e-8


# ---------------------------------------------------------------------------
# CGNE
# ---------------------------------------------------------------------------

def test_cgne_scalar():
    X, rep = cgne_q(scalar(2.0), SolverConfig(tol=1e-14, maxit=5))
    assert rep.converged
    assert X[0, 0].a == pytest.approx(0.5)


def test_cgne_one_step_orthonormal():
    Q = randn_qmat(8, 3, 18)
    from quatpinv.factor import thin_qr
    Q = thin_qr(Q).Q
    X, rep = cgne_q(Q, SolverConfig(tol=1e-13, maxit=5))
    assert rep.iterations == 1
    assert (X - Q.adjoint()).fro_norm() <= 1e-12


def test_cgne_strictly_decreasing():
    A = randn_qmat(12, 7, 19)
    _, rep = cgne_q(A, SolverConfig(tol=1e-12, maxit=100))
    res = [r for _, r in rep.residual_history]
    assert all(b < a for a, b in zip(res, res[1:]))
    assert rep.converged


def test_cgne_wide_case():
    A = randn_qmat(5, 9, 20)
    X, rep = cgne_q(A, SolverConfig(tol=1e-12, maxit=100))
    assert rep.converged
    assert (A @ X - QMatrix.identity(5)).fro_norm() <= 1e-10


def test_cgne_preconditioned():
    A = randn_qmat(20, 8, 21)
    X, rep = cgne_q(A, SolverConfig(tol=1e-10, maxit=200),
                    precond=SketchConfig(block_r=6, seed=2))
    assert rep.converged
    Xref = pinv_normal_eq(A)
    assert (X - Xref).fro_norm() <= 1e-6 * Xref.fro_norm()


def test_cgne_breakdown():
    with pytest.raises(Breakdown):
        cgne_q(QMatrix.zeros(3, 2), SolverConfig(maxit=5))


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(gamma=0.0)
    with pytest.raises(ValueError):
        SolverConfig(order=1)
    with pytest.raises(ValueError):
        SolverConfig(schedule="bogus")
    with pytest.raises(ValueError):
        SketchConfig(block_r=0)
    with pytest.raises(ValueError):
        SketchConfig(relaxation=2.0)
