"""Radix-2 complex FFT, iterative Cooley-Tukey, vectorized over rows.

Transforms are unnormalized forward; the inverse divides by the length,
so round trips are exact up to rounding and Parseval reads
||x||^2 = ||fft(x)||^2 / N.
"""

from __future__ import annotations

import numpy as np

from ..errors import NonPowerOfTwo


def _check_pow2(n: int) -> None:
    if n < 1 or (n & (n - 1)) != 0:
        raise NonPowerOfTwo(f"length {n} is not a power of two")


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def fft1(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Radix-2 decimation-in-time FFT along the given axis."""
    x = np.asarray(x, dtype=np.complex128)
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    _check_pow2(n)
    out = x[..., _bit_reverse_indices(n)].copy()
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = out.reshape(out.shape[:-1] + (n // size, size))
        even = blocks[..., :half].copy()
        odd = blocks[..., half:] * tw
        blocks[..., :half] = even + odd
        blocks[..., half:] = even - odd
        size *= 2
    return np.moveaxis(out, -1, axis)


def ifft1(x: np.ndarray, axis: int = -1) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[axis]
    return np.conj(fft1(np.conj(x), axis)) / n


def fft2(x: np.ndarray) -> np.ndarray:
    """2-D FFT of an (H, W) array; both dims must be powers of two."""
    return fft1(fft1(x, axis=1), axis=0)


def ifft2(x: np.ndarray) -> np.ndarray:
    return fft1(fft1(np.conj(x), axis=1), axis=0).conj() / (x.shape[0] * x.shape[1])
