"""Scalar quaternion arithmetic with exact Hamilton multiplication rules.

A quaternion is q = a + b*i + c*j + d*k over doubles; the imaginary units
satisfy i^2 = j^2 = k^2 = ijk = -1, so ij = k, jk = i, ki = j and the
reversed products pick up a sign. Multiplication is associative but not
commutative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DivisionByZero

_ZERO_FLOOR = 1e-300


@dataclass(frozen=True)
class Quaternion:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @staticmethod
    def from_real(x: float) -> "Quaternion":
        return Quaternion(float(x), 0.0, 0.0, 0.0)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.a + other.a, self.b + other.b,
                          self.c + other.c, self.d + other.d)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.a - other.a, self.b - other.b,
                          self.c - other.c, self.d - other.d)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.a * other, self.b * other,
                              self.c * other, self.d * other)
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.a * other, self.b * other,
                              self.c * other, self.d * other)
        return mul(other, self)

    def conj(self) -> "Quaternion":
        return conj(self)

    def norm(self) -> float:
        return norm(self)

    def inv(self) -> "Quaternion":
        return inv(self)

    def is_close(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return norm(self - other) <= tol


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product p*q (order matters)."""
    return Quaternion(
        p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    )


def conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.a, -q.b, -q.c, -q.d)


def norm(q: Quaternion) -> float:
    return math.sqrt(q.a * q.a + q.b * q.b + q.c * q.c + q.d * q.d)


def inv(q: Quaternion) -> Quaternion:
    """Multiplicative inverse conj(q)/|q|^2; raises on (near-)zero input."""
    n2 = q.a * q.a + q.b * q.b + q.c * q.c + q.d * q.d
    if n2 < _ZERO_FLOOR:
        raise DivisionByZero("quaternion magnitude below 1e-300")
    return Quaternion(q.a / n2, -q.b / n2, -q.c / n2, -q.d / n2)
