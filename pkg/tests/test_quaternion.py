import math

import pytest
from hypothesis import given, strategies as st

from quatpinv.errors import DivisionByZero
from quatpinv.quaternion import I, J, K, ONE, Quaternion, conj, inv, mul, norm

EPS = 2.220446049250313e-16

finite = st.floats(min_value=-1e3, max_value=1e3,
                   allow_nan=False, allow_infinity=False)
quats = st.builds(Quaternion, finite, finite, finite, finite)


def test_hamilton_table():
    assert (I * J).is_close(K)
    assert (J * K).is_close(I)
    assert (K * I).is_close(J)
    assert (J * I).is_close(-K)
    assert (K * J).is_close(-I)
    assert (I * K).is_close(-J)
    assert (I * I).is_close(-ONE)
    assert (J * J).is_close(-ONE)
    assert (K * K).is_close(-ONE)


def test_product_hand_example():
    p = Quaternion(1, 2, 3, 4)
    q = Quaternion(5, 6, 7, 8)
    # expanded by the Hamilton table by hand
    assert (p * q).is_close(Quaternion(-60, 12, 30, 24))
    assert (q * p).is_close(Quaternion(-60, 20, 14, 32))
    assert not (p * q).is_close(q * p)


def test_module_functions_match_methods():
    p = Quaternion(0.5, -1.0, 2.0, 0.25)
    q = Quaternion(-3.0, 0.1, 0.0, 1.0)
    assert mul(p, q).is_close(p * q)
    assert conj(p).is_close(p.conj())
    assert norm(p) == p.norm()
    assert inv(p).is_close(p.inv())


def test_conj_antihomomorphism():
    p = Quaternion(1, -2, 0.5, 3)
    q = Quaternion(-1, 4, 2, -0.5)
    assert (p * q).conj().is_close(q.conj() * p.conj())


def test_real_scalar_mul():
    p = Quaternion(1, 2, 3, 4)
    assert (2.0 * p).is_close(Quaternion(2, 4, 6, 8))
    assert (p * 2.0).is_close(Quaternion(2, 4, 6, 8))


def test_inverse():
    q = Quaternion(1, 2, 3, 4)
    assert (q * q.inv()).is_close(ONE, tol=1e-14)
    assert (q.inv() * q).is_close(ONE, tol=1e-14)
    with pytest.raises(DivisionByZero):
        Quaternion(0, 0, 0, 0).inv()


def test_norm_example():
    assert norm(Quaternion(1, 1, 1, 1)) == pytest.approx(2.0)
    assert norm(Quaternion(0, 0, 0, 0)) == 0.0


@given(quats, quats, quats)
def test_associativity(p, q, r):
    lhs = (p * q) * r
    rhs = p * (q * r)
    scale = max(p.norm() * q.norm() * r.norm(), 1.0)
    assert (lhs - rhs).norm() <= 16 * EPS * scale


@given(quats, quats)
def test_norm_multiplicative(p, q):
    assert abs((p * q).norm() - p.norm() * q.norm()) <= \
        8 * EPS * max(p.norm() * q.norm(), 1.0)


@given(quats, quats)
def test_real_part_symmetry(p, q):
    # Re(p conj(q)) is a real inner product, hence symmetric
    lhs = (p * q.conj()).a
    rhs = (q * p.conj()).a
    assert abs(lhs - rhs) <= 8 * EPS * max(p.norm() * q.norm(), 1.0)
