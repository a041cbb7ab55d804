"""Array-level quaternion kernels.

Quaternion arrays carry a trailing axis of length 4 holding (a, b, c, d)
components. The matrix product is expressed as 16 real BLAS products over
the component planes, which is the Hamilton product written out component
by component (left/right order preserved).
"""

from __future__ import annotations

import numpy as np


def qmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elementwise (broadcasting) Hamilton product of (..., 4) arrays."""
    a, b, c, d = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    e, f, g, h = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
    return np.stack([
        a * e - b * f - c * g - d * h,
        a * f + b * e + c * h - d * g,
        a * g - b * h + c * e + d * f,
        a * h + b * g - c * f + d * e,
    ], axis=-1)


def qconj(x: np.ndarray) -> np.ndarray:
    out = x.copy()
    out[..., 1:] *= -1.0
    return out


def qnormsq(x: np.ndarray) -> np.ndarray:
    """Elementwise squared magnitude, shape (...)."""
    return np.sum(x * x, axis=-1)


def qmatmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Quaternion matrix product of (m, k, 4) @ (k, n, 4) -> (m, n, 4)."""
    a, b, c, d = x[:, :, 0], x[:, :, 1], x[:, :, 2], x[:, :, 3]
    e, f, g, h = y[:, :, 0], y[:, :, 1], y[:, :, 2], y[:, :, 3]
    return np.stack([
        a @ e - b @ f - c @ g - d @ h,
        a @ f + b @ e + c @ h - d @ g,
        a @ g - b @ h + c @ e + d @ f,
        a @ h + b @ g - c @ f + d @ e,
    ], axis=-1)


def qdot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Quaternion inner product sum(conj(x_i) * y_i) over leading axis.

    x, y: (n, 4) arrays; returns a (4,) quaternion.
    """
    return qmul(qconj(x), y).sum(axis=0)
