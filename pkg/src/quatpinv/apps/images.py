"""Quaternion color images, PPM I/O, PSNR, and Gaussian smoothing.

A color image lives on the imaginary axes of an H x W quaternion field:
red on i, green on j, blue on k, real part zero. Pixel values are in
[0, 1] unless stated otherwise.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DimensionMismatch, StructureViolation
from ..qmatrix import QMatrix

PSNR_CAP_DB = 200.0


def image_to_qmat(rgb: np.ndarray) -> QMatrix:
    """(H, W, 3) real array -> quaternion field with channels on i, j, k."""
    h, w, _ = rgb.shape
    d = np.zeros((h, w, 4))
    d[..., 1:] = rgb
    return QMatrix(d)


def qmat_to_image(A: QMatrix) -> np.ndarray:
    return A.data[..., 1:].copy()


def psnr(ref, test) -> float:
    """10*log10(1/MSE) at dynamic range 1.0; identical images cap at 200 dB.

    Accepts (H, W, 3) arrays or quaternion images (compared over i, j, k).
    """
    if isinstance(ref, QMatrix):
        ref = qmat_to_image(ref)
    if isinstance(test, QMatrix):
        test = qmat_to_image(test)
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise DimensionMismatch(f"{ref.shape} vs {test.shape}")
    mse = float(np.mean((ref - test) ** 2))
    if mse <= 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


def gaussian_smooth(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian filter with replicate boundary, kernel size
    2*ceil(2*sigma)+1, applied to each trailing channel independently."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rad = int(math.ceil(2.0 * sigma))
    t = np.arange(-rad, rad + 1, dtype=np.float64)
    k = np.exp(-0.5 * (t / sigma) ** 2)
    k /= k.sum()
    img = np.asarray(img, dtype=np.float64)
    squeeze = img.ndim == 2
    if squeeze:
        img = img[:, :, None]
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        p = np.pad(img[:, :, c], rad, mode="edge")
        p = np.apply_along_axis(lambda v: np.convolve(v, k, mode="valid"), 0, p)
        p = np.apply_along_axis(lambda v: np.convolve(v, k, mode="valid"), 1, p)
        out[:, :, c] = p
    return out[:, :, 0] if squeeze else out


def smooth_qimage(A: QMatrix, sigma: float) -> QMatrix:
    rgb = gaussian_smooth(qmat_to_image(A), sigma)
    return image_to_qmat(rgb)


# ---------------------------------------------------------------------------
# PPM (P6) files
# ---------------------------------------------------------------------------

def write_ppm(path, rgb: np.ndarray) -> None:
    """Write an (H, W, 3) array in [0, 1] as a binary P6 file."""
    h, w, _ = rgb.shape
    data = np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(data.tobytes())


def read_ppm(path) -> np.ndarray:
    """Read a binary P6 file into an (H, W, 3) array in [0, 1]."""
    with open(path, "rb") as fh:
        raw = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    if fields[0] != b"P6":
        raise StructureViolation("not a P6 PPM file")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    pos += 1  # single whitespace after maxval
    body = np.frombuffer(raw, dtype=np.uint8, count=h * w * 3, offset=pos)
    return body.reshape(h, w, 3).astype(np.float64) / float(maxval)


def synthetic_image(n: int, seed: int = 0) -> np.ndarray:
    """Deterministic piecewise-smooth (n, n, 3) test image in [0, 1].

    Smooth color gradients plus a few hard-edged shapes, so blurring and
    completion experiments have both low-frequency and edge content.
    """
    y, x = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    u = x / max(n - 1, 1)
    v = y / max(n - 1, 1)
    r = 0.5 + 0.4 * np.sin(2 * np.pi * (u + 0.3 * v) + seed)
    g = 0.5 + 0.4 * np.cos(2 * np.pi * (v - 0.2 * u) + 0.7 * seed)
    b = 0.5 + 0.35 * np.sin(2 * np.pi * u * v + 1.3 * seed)
    img = np.stack([r, g, b], axis=-1)
    cx, cy, rad = 0.3 * n, 0.6 * n, 0.18 * n
    disk = (x - cx) ** 2 + (y - cy) ** 2 < rad ** 2
    img[disk] = [0.9, 0.2, 0.15]
    box = (x > 0.55 * n) & (x < 0.8 * n) & (y > 0.15 * n) & (y < 0.35 * n)
    img[box] = [0.1, 0.75, 0.9]
    return np.clip(img, 0.0, 1.0)
