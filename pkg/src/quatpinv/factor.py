"""Direct factorizations: thin QR, Hermitian-PD solves, SVD, and the
closed-form / SVD-based pseudoinverse baselines.

The SVD runs on the complex adjoint embedding with a one-sided Jacobi
sweep, then reassembles quaternion factors from the paired complex
singular vectors. These routines serve as oracles for the iterative
solvers and as micro-solvers inside the randomized methods.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _qops
from .errors import (ConvergenceFailure, Indefinite, NotHermitian,
                     RankDeficient)
from .qmatrix import QMatrix, op_norm_est


@dataclass
class QRFactors:
    Q: QMatrix  # m x r, orthonormal columns
    R: QMatrix  # r x r, upper triangular, real positive diagonal


@dataclass
class QSVDFactors:
    U: QMatrix        # m x m unitary
    S: np.ndarray     # min(m, n) nonnegative, nonincreasing
    V: QMatrix        # n x n unitary


# ---------------------------------------------------------------------------
# Thin QR via quaternion Householder reflectors
# ---------------------------------------------------------------------------

def thin_qr(Y: QMatrix, rank_tol: float = 1e-12) -> QRFactors:
    """Householder QR of a tall matrix; R diagonal made real positive.

    Raises RankDeficient when the smallest diagonal of R falls below
    rank_tol * ||Y||_F (caller typically redraws its sketch).
    """
    m, r = Y.shape
    if m < r:
        raise RankDeficient("thin_qr requires m >= r")
    scale = Y.fro_norm()
    W = Y.data.copy()
    reflectors = []
    for k in range(r):
        x = W[k:, k, :]
        normx = float(np.sqrt(np.sum(x * x)))
        if normx == 0.0:
            reflectors.append(None)
            continue
        x1 = x[0]
        ax1 = float(np.sqrt(np.sum(x1 * x1)))
        phi = x1 / ax1 if ax1 > 0 else np.array([1.0, 0.0, 0.0, 0.0])
        v = x.copy()
        v[0] = v[0] + phi * normx
        vns = float(np.sum(v * v))
        if vns == 0.0:
            reflectors.append(None)
            continue
        vcol = v[:, None, :]
        vH = _qops.qconj(v)[None, :, :]
        t = _qops.qmatmul(vH, W[k:, k:, :])
        W[k:, k:, :] -= (2.0 / vns) * _qops.qmatmul(vcol, t)
        # reflector maps the column to -phi*normx * e1 exactly
        W[k, k, :] = -phi * normx
        W[k + 1:, k, :] = 0.0
        reflectors.append((k, vcol, vns))

    Rdat = W[:r, :, :].copy()
    # unit-quaternion row scaling to make the diagonal real positive
    dvals = []
    for k in range(r):
        rkk = Rdat[k, k, :]
        mag = float(np.sqrt(np.sum(rkk * rkk)))
        if mag == 0.0:
            dvals.append(np.array([1.0, 0.0, 0.0, 0.0]))
            continue
        d = rkk.copy()
        d[1:] *= -1.0
        d /= mag
        Rdat[k, :, :] = _qops.qmul(d, Rdat[k, :, :])
        Rdat[k, k, :] = np.array([mag, 0.0, 0.0, 0.0])
        dvals.append(d)

    diag = Rdat[np.arange(r), np.arange(r), 0]
    if diag.min() <= rank_tol * max(scale, 1e-300):
        raise RankDeficient(
            f"R diagonal {diag.min():.3e} <= {rank_tol:.1e} * {scale:.3e}")

    Qdat = np.zeros((m, r, 4))
    Qdat[np.arange(r), np.arange(r), 0] = 1.0
    for ref in reversed(reflectors):
        if ref is None:
            continue
        k, vcol, vns = ref
        vH = _qops.qconj(vcol[:, 0, :])[None, :, :]
        t = _qops.qmatmul(vH, Qdat[k:, :, :])
        Qdat[k:, :, :] -= (2.0 / vns) * _qops.qmatmul(vcol, t)
    for k in range(r):
        dbar = dvals[k].copy()
        dbar[1:] *= -1.0
        Qdat[:, k, :] = _qops.qmul(Qdat[:, k, :], dbar)

    return QRFactors(Q=QMatrix(Qdat), R=QMatrix(Rdat))


def solve_upper_triangular(R: QMatrix, B: QMatrix) -> QMatrix:
    """Solve R Z = B for upper-triangular R with real positive diagonal."""
    r = R.rows
    Z = np.zeros_like(B.data)
    Rd = R.data
    Bd = B.data
    for j in range(r - 1, -1, -1):
        acc = Bd[j:j + 1, :, :].copy()
        if j + 1 < r:
            acc = acc - _qops.qmatmul(Rd[j:j + 1, j + 1:, :], Z[j + 1:, :, :])
        Z[j, :, :] = acc[0] / Rd[j, j, 0]
    return QMatrix(Z)


def pinv_from_qr(Y: QMatrix, rank_tol: float = 1e-12) -> QMatrix:
    """Y^dagger = R^{-1} Q^H for numerically full-column-rank Y."""
    f = thin_qr(Y, rank_tol)
    return solve_upper_triangular(f.R, f.Q.adjoint())


# ---------------------------------------------------------------------------
# Hermitian positive definite solves
# ---------------------------------------------------------------------------

def _cholesky(Gd: np.ndarray) -> np.ndarray | None:
    """Quaternion Cholesky G = L L^H; returns None on a nonpositive pivot."""
    r = Gd.shape[0]
    L = np.zeros_like(Gd)
    gscale = float(np.sqrt(np.sum(Gd * Gd)))
    for j in range(r):
        d = Gd[j, j, 0] - float(np.sum(L[j, :j, :] * L[j, :j, :]))
        if d <= 1e-14 * max(gscale, 1e-300):
            return None
        ljj = np.sqrt(d)
        L[j, j, 0] = ljj
        if j + 1 < r:
            acc = Gd[j + 1:, j, :].copy()
            if j > 0:
                conj_row = _qops.qconj(L[j, :j, :])[:, None, :]
                acc -= _qops.qmatmul(L[j + 1:, :j, :], conj_row)[:, 0, :]
            L[j + 1:, j, :] = acc / ljj
    return L


def _chol_solve(L: np.ndarray, Bd: np.ndarray) -> np.ndarray:
    r = L.shape[0]
    Y = np.zeros_like(Bd)
    for j in range(r):
        acc = Bd[j:j + 1, :, :].copy()
        if j > 0:
            acc = acc - _qops.qmatmul(L[j:j + 1, :j, :], Y[:j, :, :])
        Y[j, :, :] = acc[0] / L[j, j, 0]
    Z = np.zeros_like(Bd)
    for j in range(r - 1, -1, -1):
        acc = Y[j:j + 1, :, :].copy()
        if j + 1 < r:
            LH = _qops.qconj(L[j + 1:, j, :])[None, :, :]
            acc = acc - _qops.qmatmul(LH, Z[j + 1:, :, :])
        Z[j, :, :] = acc[0] / L[j, j, 0]
    return Z


def _frob_inner(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(x * y))


def hpd_solve(G: QMatrix, B: QMatrix, ridge: float = 1e-10,
              tol: float = 1e-10) -> QMatrix:
    """Solve (G + ridge*I) Z = B for Hermitian positive definite G.

    Cholesky first; if a pivot fails or the residual is poor, a CG
    micro-solver takes over (iteration cap 4r), then a few Newton-Schulz
    steps for G^{-1} as a last resort. Raises NotHermitian / Indefinite.
    """
    r, _ = G.shape
    if G.cols != r:
        raise NotHermitian("hpd_solve needs a square matrix")
    herm_gap = (G - G.adjoint()).fro_norm()
    if herm_gap > 1e-10 * max(G.fro_norm(), 1e-300):
        raise NotHermitian(f"||G - G^H|| = {herm_gap:.3e}")
    if B.rows != r:
        raise NotHermitian("B row count differs from G")

    Gd = G.data.copy()
    Gd[np.arange(r), np.arange(r), 0] += ridge
    Gr = QMatrix(Gd)
    bnorm = max(B.fro_norm(), 1e-300)

    L = _cholesky(Gd)
    if L is not None:
        Z = QMatrix(_chol_solve(L, B.data))
        if (Gr @ Z - B).fro_norm() <= tol * bnorm:
            return Z
    else:
        # pivot failure: distinguish indefinite from merely singular/ill-
        # conditioned before handing off to the iterative fallbacks
        lo = float(np.linalg.eigvalsh(G.to_complex_adjoint())[0])
        if lo < -1e-10 * max(G.fro_norm(), 1e-300):
            raise Indefinite(f"min eigenvalue {lo:.3e} < 0")

    # CG fallback in the real trace inner product
    Z = QMatrix.zeros(r, B.cols)
    Rres = B - Gr @ Z
    P = Rres.copy()
    rs = _frob_inner(Rres.data, Rres.data)
    for _ in range(4 * r):
        if np.sqrt(rs) <= tol * bnorm:
            break
        GP = Gr @ P
        denom = _frob_inner(P.data, GP.data)
        if denom <= 0:
            break
        a = rs / denom
        Z = QMatrix(Z.data + a * P.data)
        Rres = QMatrix(Rres.data - a * GP.data)
        rs_new = _frob_inner(Rres.data, Rres.data)
        P = QMatrix(Rres.data + (rs_new / rs) * P.data)
        rs = rs_new
    if (Gr @ Z - B).fro_norm() <= tol * bnorm:
        return Z

    # Newton-Schulz fallback for G^{-1}
    est = op_norm_est(Gr, iters=20, seed=0)
    if est > 0:
        X = Gr.adjoint().scale(0.9 / est ** 2)
        I = QMatrix.identity(r)
        for _ in range(100):
            E = I - Gr @ X
            if E.fro_norm() <= 1e-14 * r:
                break
            X = X @ (I + E)
        Z = X @ B
        if (Gr @ Z - B).fro_norm() <= tol * bnorm:
            return Z
    raise Indefinite("Cholesky failed and CG/NS fallbacks stagnated")


# ---------------------------------------------------------------------------
# SVD via the complex adjoint embedding + one-sided Jacobi
# ---------------------------------------------------------------------------

def _jacobi_one_sided(M: np.ndarray, max_sweeps: int = 60,
                      tol: float = 1e-12):
    """Orthogonalize the columns of complex M in place; returns (M, V).

    Stops when the Gram off-diagonal norm drops below tol * ||M||_F^2.
    """
    M = M.copy()
    n = M.shape[1]
    V = np.eye(n, dtype=np.complex128)
    scale2 = float(np.sum(np.abs(M) ** 2))
    if scale2 == 0.0:
        return M, V
    for _ in range(max_sweeps):
        off2 = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                gij = np.vdot(M[:, i], M[:, j])
                r = abs(gij)
                off2 += r * r
                if r <= 1e-30:
                    continue
                gii = float(np.real(np.vdot(M[:, i], M[:, i])))
                gjj = float(np.real(np.vdot(M[:, j], M[:, j])))
                if r <= 1e-16 * np.sqrt(gii * gjj):
                    continue
                phase = gij / r
                tau = (gjj - gii) / (2.0 * r)
                t = np.sign(tau) if tau != 0 else 1.0
                t = t / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                mi = M[:, i].copy()
                mj = M[:, j].copy()
                M[:, i] = c * mi - (s * np.conj(phase)) * mj
                M[:, j] = (s * phase) * mi + c * mj
                vi = V[:, i].copy()
                vj = V[:, j].copy()
                V[:, i] = c * vi - (s * np.conj(phase)) * vj
                V[:, j] = (s * phase) * vi + c * vj
        if np.sqrt(off2) <= tol * scale2:
            return M, V
    raise ConvergenceFailure("one-sided Jacobi exceeded 60 sweeps")


def _phi(v: np.ndarray) -> np.ndarray:
    """Structure map pairing singular vectors of the embedding."""
    out = np.empty_like(v)
    out[0::2] = np.conj(v[1::2])
    out[1::2] = -np.conj(v[0::2])
    return out


def _pair_to_quaternion_columns(Vc: np.ndarray, order: np.ndarray,
                                n: int) -> QMatrix:
    """Select one complex singular vector per structure pair and assemble
    the n quaternion columns of the right singular factor."""
    basis: list[np.ndarray] = []
    chosen: list[np.ndarray] = []
    for idx in order:
        if len(chosen) == n:
            break
        v = Vc[:, idx].copy()
        for b in basis:
            v -= b * np.vdot(b, v)
        nv = np.linalg.norm(v)
        if nv < 0.3:
            continue
        v /= nv
        p = _phi(v)
        for b in basis:
            p -= b * np.vdot(b, p)
        p -= v * np.vdot(v, p)
        p /= np.linalg.norm(p)
        chosen.append(v)
        basis.append(v)
        basis.append(p)
    if len(chosen) != n:
        raise ConvergenceFailure("failed to pair embedding singular vectors")
    cols = np.zeros((n, n, 4))
    for jcol, v in enumerate(chosen):
        x = v[0::2]
        y = v[1::2]
        cols[:, jcol, 0] = x.real
        cols[:, jcol, 1] = x.imag
        cols[:, jcol, 2] = -y.real
        cols[:, jcol, 3] = y.imag
    return QMatrix(cols)


def _complete_unitary(cols: np.ndarray, m: int) -> np.ndarray:
    """Extend orthonormal quaternion columns (m, k, 4) to an m x m basis."""
    have = [cols[:, j, :] for j in range(cols.shape[1])]
    cand = 0
    while len(have) < m and cand < 4 * m + 4:
        e = np.zeros((m, 4))
        if cand < m:
            e[cand, 0] = 1.0
        else:
            # deterministic fallback directions
            e[cand % m, 1 + (cand // m) % 3] = 1.0
        for b in have:
            coef = _qops.qdot(b, e)
            e = e - _qops.qmul(b, coef)
        nrm = np.sqrt(np.sum(e * e))
        if nrm > 0.3:
            have.append(e / nrm)
        cand += 1
    if len(have) < m:
        raise ConvergenceFailure("could not complete unitary basis")
    return np.stack(have, axis=1)


def qsvd(A: QMatrix, max_sweeps: int = 60) -> QSVDFactors:
    """Quaternion SVD A = U diag(S) V^H with full unitary U, V.

    Route: complex adjoint embedding -> one-sided Jacobi -> structured
    extraction of paired singular vectors -> quaternion factors.
    """
    m, n = A.shape
    if m < n:
        f = qsvd(A.adjoint(), max_sweeps)
        return QSVDFactors(U=f.V, S=f.S, V=f.U)

    C = A.to_complex_adjoint()
    B, Vc = _jacobi_one_sided(C, max_sweeps=max_sweeps)
    sig = np.linalg.norm(B, axis=0)
    order = np.argsort(-sig, kind="stable")
    Vq = _pair_to_quaternion_columns(Vc, order, n)

    AV = A @ Vq
    s = np.sqrt(_qops.qnormsq(AV.data).sum(axis=0))
    perm = np.argsort(-s, kind="stable")
    s = s[perm]
    Vq = QMatrix(Vq.data[:, perm, :].copy())
    AVd = AV.data[:, perm, :]

    smax = s[0] if s.size else 0.0
    ucols = []
    for i in range(n):
        if smax > 0 and s[i] > 1e-13 * smax:
            ucols.append(AVd[:, i, :] / s[i])
        else:
            s[i] = max(s[i], 0.0)
    if ucols:
        Udat = _complete_unitary(np.stack(ucols, axis=1), m)
    else:
        Udat = _complete_unitary(np.zeros((m, 0, 4)), m)
    return QSVDFactors(U=QMatrix(Udat), S=s, V=Vq)


def pinv_qsvd(A: QMatrix, rank_tol: float = 1e-10) -> QMatrix:
    """Pseudoinverse V Sigma^+ U^H; sigma <= rank_tol * max sigma -> 0."""
    f = qsvd(A)
    k = f.S.size
    smax = f.S[0] if k else 0.0
    sinv = np.where(f.S > rank_tol * max(smax, 1e-300), 1.0 / np.maximum(f.S, 1e-300), 0.0)
    Vk = f.V.data[:, :k, :] * sinv[None, :, None]
    return QMatrix(Vk) @ QMatrix(f.U.data[:, :k, :].copy()).adjoint()


def pinv_normal_eq(A: QMatrix, ridge: float = 0.0) -> QMatrix:
    """Closed-form full-rank pseudoinverse through the Gram system.

    Tall (and square) inputs use (A^H A)^{-1} A^H; wide inputs use
    A^H (A A^H)^{-1}. Indefinite propagates on rank deficiency.
    """
    m, n = A.shape
    Ah = A.adjoint()
    if m >= n:
        return hpd_solve(Ah @ A, Ah, ridge)
    W = hpd_solve(A @ Ah, QMatrix.identity(m), ridge)
    return Ah @ W
