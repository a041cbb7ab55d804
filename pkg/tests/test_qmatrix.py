import numpy as np
import pytest

from quatpinv.errors import DimensionMismatch, NonPowerOfTwo, StructureViolation
from quatpinv.qmatrix import (QMatrix, op_norm_est, pad_pow2, randn_qmat,
                              require_pow2)
from quatpinv.quaternion import Quaternion


def embed(A: QMatrix) -> np.ndarray:
    return A.to_complex_adjoint()


def test_matmul_against_embedding_oracle():
    A = randn_qmat(7, 5, 0)
    B = randn_qmat(5, 6, 1)
    C = A @ B
    assert np.allclose(embed(C), embed(A) @ embed(B), atol=1e-12)


def test_matmul_scalar_example():
    A = QMatrix.from_entries([[Quaternion(0, 1, 0, 0)]])   # i
    B = QMatrix.from_entries([[Quaternion(0, 0, 1, 0)]])   # j
    assert (A @ B)[0, 0].is_close(Quaternion(0, 0, 0, 1))  # ij = k
    assert (B @ A)[0, 0].is_close(Quaternion(0, 0, 0, -1))


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        randn_qmat(3, 4, 0) @ randn_qmat(3, 4, 0)


def test_adjoint_reverses_products():
    A = randn_qmat(4, 3, 2)
    B = randn_qmat(3, 5, 3)
    lhs = (A @ B).adjoint()
    rhs = B.adjoint() @ A.adjoint()
    assert (lhs - rhs).fro_norm() <= 1e-12


def test_adjoint_isometry_and_involution():
    A = randn_qmat(6, 4, 4)
    assert A.adjoint().fro_norm() == pytest.approx(A.fro_norm())
    assert (A.adjoint().adjoint() - A).fro_norm() == 0.0


def test_fro_norm_example():
    A = QMatrix.from_entries([[Quaternion(1, 1, 1, 1)]])
    assert A.fro_norm() == pytest.approx(2.0)


def test_submultiplicativity():
    rng = np.random.default_rng(0)
    for t in range(200):
        m, k, n = rng.integers(1, 6, size=3)
        A = randn_qmat(int(m), int(k), 100 + t)
        B = randn_qmat(int(k), int(n), 300 + t)
        assert (A @ B).fro_norm() <= A.fro_norm() * B.fro_norm() * (1 + 1e-12)


def test_scale_left_right_noncommutative():
    A = randn_qmat(3, 3, 7)
    q = Quaternion(0, 1, 0, 0)
    left = A.scale_left(q)
    right = A.scale_right(q)
    assert (left - right).fro_norm() > 1e-8


def test_op_norm_est_diagonal():
    A = QMatrix.from_real(np.diag([3.0, 1.0]))
    assert op_norm_est(A) == pytest.approx(3.0, rel=1e-6)
    assert op_norm_est(QMatrix.zeros(3, 2)) == 0.0


def test_op_norm_est_unitary_invariance():
    # diag(i, j) is unitary; sandwiching preserves the spectral norm
    A = QMatrix.from_real(np.diag([2.0, 0.5]))
    U = QMatrix.from_entries([
        [Quaternion(0, 1, 0, 0), Quaternion(0, 0, 0, 0)],
        [Quaternion(0, 0, 0, 0), Quaternion(0, 0, 1, 0)],
    ])
    assert op_norm_est(U @ A @ U.adjoint()) == pytest.approx(2.0, rel=1e-6)


def test_randn_statistics_and_determinism():
    A = randn_qmat(60, 60, 5)
    mean_sq = float(A.abs2().mean())   # |q|^2 sums four unit variances
    assert abs(mean_sq - 4.0) < 0.2
    B = randn_qmat(60, 60, 5)
    assert (A - B).fro_norm() == 0.0
    C = randn_qmat(60, 60, 6)
    assert (A - C).fro_norm() > 1.0


def test_complex_adjoint_unit_example():
    Aj = QMatrix.from_entries([[Quaternion(0, 0, 1, 0)]])
    assert np.allclose(embed(Aj), np.array([[0, 1], [-1, 0]], dtype=complex))


def test_complex_adjoint_roundtrip_and_norm():
    A = randn_qmat(4, 5, 9)
    C = embed(A)
    assert np.linalg.norm(C) == pytest.approx(np.sqrt(2) * A.fro_norm())
    B = QMatrix.from_complex_adjoint(C)
    assert (A - B).fro_norm() <= 1e-14


def test_complex_adjoint_structure_violation():
    C = embed(randn_qmat(2, 2, 11))
    C[0, 1] += 1.0   # break the pairing symmetry
    with pytest.raises(StructureViolation):
        QMatrix.from_complex_adjoint(C)


def test_hadamard_and_mask():
    A = randn_qmat(3, 4, 12)
    ones = QMatrix.from_real(np.ones((3, 4)))
    assert (A.hadamard(ones) - A).fro_norm() == 0.0
    mask = np.zeros((3, 4))
    mask[0, 0] = 1.0
    M = A.mask(mask)
    assert M[0, 0].is_close(A[0, 0])
    assert M.fro_norm() == pytest.approx(A[0, 0].norm())


def test_take_rows_cols():
    A = randn_qmat(4, 5, 13)
    S = A.take_rows([2, 0]).take_cols([1, 1, 3])
    assert S.shape == (2, 3)
    assert S[0, 0].is_close(A[2, 1])
    assert S[1, 2].is_close(A[0, 3])


def test_save_load_text_roundtrip(tmp_path):
    A = randn_qmat(3, 2, 14)
    path = tmp_path / "a.qmat"
    A.save_text(path)
    first = path.read_text().splitlines()[0]
    assert first == "QMAT 3 2"
    B = QMatrix.load_text(path)
    assert (A - B).fro_norm() == 0.0


def test_pow2_helpers():
    require_pow2(8)
    with pytest.raises(NonPowerOfTwo):
        require_pow2(6)
    x = np.ones((3, 5))
    p = pad_pow2(x)
    assert p.shape == (4, 8)
    assert np.all(p[:3, :5] == 1.0) and p.sum() == 15.0
