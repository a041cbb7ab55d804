"""Lorenz-attractor quaternion filter identification.

The three Lorenz state channels ride on the imaginary units; the filter
input is a one-step-delayed noisy copy of the target. Stacking delayed
samples gives a Toeplitz quaternion system X * w = Y solved by a square
Newton-Schulz inverse, with all products kept in right-multiplication
order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import Divergence
from ..qmatrix import QMatrix, op_norm_est
from ..rng import QuatRNG
from ..solvers import SolverReport


@dataclass
class LorenzProblem:
    N: int = 50
    T_end: float = 10.0
    sigma_l: float = 10.0
    beta_l: float = 8.0 / 3.0
    rho_l: float = 28.0
    x0: float = 1.0
    y0: float = 1.0
    z0: float = 1.0
    noise_level: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")


def lorenz_rk4(problem: LorenzProblem, samples: int) -> np.ndarray:
    """Fixed-step RK4 trajectory, shape (samples, 3)."""
    p = problem
    dt = p.T_end / (samples - 1)

    def f(s):
        x, y, z = s
        return np.array([p.sigma_l * (y - x),
                         x * (p.rho_l - z) - y,
                         x * y - p.beta_l * z])

    out = np.empty((samples, 3))
    s = np.array([p.x0, p.y0, p.z0], dtype=np.float64)
    out[0] = s
    for k in range(1, samples):
        k1 = f(s)
        k2 = f(s + 0.5 * dt * k1)
        k3 = f(s + 0.5 * dt * k2)
        k4 = f(s + dt * k3)
        s = s + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k] = s
    return out


def lorenz_build(problem: LorenzProblem):
    """Assemble the N x N Toeplitz system (X, Y) plus the raw signals.

    Target y(t) carries the Lorenz states on (i, j, k); the input is the
    one-step-delayed target plus channelwise Gaussian noise scaled by
    noise_level times each channel's standard deviation.
    """
    N = problem.N
    samples = 2 * N - 1
    traj = lorenz_rk4(problem, samples + 1)  # one extra step for the delay
    y_sig = traj[1:]                          # y(t) for t = 0..samples-1
    rng = QuatRNG(problem.seed)
    noise = rng.normals((samples, 3))
    x_sig = traj[:-1] + problem.noise_level * y_sig.std(axis=0) * noise

    t0 = N - 1
    Xd = np.zeros((N, N, 4))
    for p_ in range(N):
        for q_ in range(N):
            Xd[p_, q_, 1:] = x_sig[t0 + p_ - q_]
    Yd = np.zeros((N, 1, 4))
    Yd[:, 0, 1:] = y_sig[t0:t0 + N]
    return QMatrix(Xd), QMatrix(Yd), {"y": y_sig, "x": x_sig}


def lorenz_solve_ns(X: QMatrix, Y: QMatrix, tol: float = 1e-6,
                    maxit: int | None = None):
    """Square Newton-Schulz inverse X_k <- X_k (2I - X X_k), w = X_k Y.

    Stops when RelRes = ||X w - Y||_F / ||Y||_F <= tol. If the initial
    spectral scaling is not contractive, damped steps are taken until
    the residual enters the quadratic regime.
    """
    N = X.rows
    if maxit is None:
        maxit = N
    t0 = time.perf_counter()
    est = op_norm_est(X, iters=20, seed=0)
    alpha = 0.99 / (est * est) if est > 0 else 1.0
    Xk = X.adjoint().scale(alpha)
    I = QMatrix.identity(N)
    ynorm = max(Y.fro_norm(), 1e-300)
    history = []
    converged = False
    iters = 0
    gamma_damp = 0.5
    prev = None
    for k in range(maxit + 1):
        w = Xk @ Y
        relres = (X @ w - Y).fro_norm() / ynorm
        history.append((k, relres))
        if relres <= tol:
            converged = True
            iters = k
            break
        if prev is not None and relres > 10.0 * prev and relres > 1e3:
            raise Divergence("NS residual exploded; scaling invalid")
        if k == maxit:
            iters = k
            break
        E = I - X @ Xk
        if E.fro_norm() >= float(N):
            # outside the contraction region: damped step
            Xk = Xk @ (I.scale(1.0 - gamma_damp) + E.scale(gamma_damp))
        else:
            Xk = Xk @ (I + E)
        prev = relres
        iters = k + 1
    w = Xk @ Y
    wall = time.perf_counter() - t0
    report = SolverReport("ns-q-square", iters, history, wall,
                          (0.0, 0.0, 0.0, 0.0), converged)
    return w, report
