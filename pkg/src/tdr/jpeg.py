"""In-memory baseline-JPEG-equivalent degradation.

Reproduces the pixel effect of a baseline JPEG round trip without any
bitstream work: 8x8 block DCT-II, quantization by the standard luminance
and chrominance tables scaled with the libjpeg quality convention
(scale = 5000/q for q < 50, else 200 - 2q; entries clamped to [1, 255]),
dequantization, inverse DCT. Three-channel images go through full-range
BT.601 YCbCr; no chroma subsampling, no entropy coding. Deterministic.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dctn, idctn

from .image import as_array, same_kind

# ITU T.81 Annex K reference tables
LUMA_QUANT = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.float64)

CHROMA_QUANT = np.array([
    [17, 18, 24, 47, 99, 99, 99, 99],
    [18, 21, 26, 66, 99, 99, 99, 99],
    [24, 26, 56, 99, 99, 99, 99, 99],
    [47, 66, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
], dtype=np.float64)


def quality_scaled_table(base: np.ndarray, quality: int) -> np.ndarray:
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must be in [1, 100], got {quality}")
    scale = 5000.0 / quality if quality < 50 else 200.0 - 2.0 * quality
    return np.clip(np.floor((base * scale + 50.0) / 100.0), 1.0, 255.0)


def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    """Full-range BT.601 on the 0..255 scale; input (H, W, 3)."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0
    cr = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0
    return np.stack([y, cb, cr], axis=-1)


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    y, cb, cr = ycc[..., 0], ycc[..., 1] - 128.0, ycc[..., 2] - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return np.stack([r, g, b], axis=-1)


def _quantize_plane(plane: np.ndarray, table: np.ndarray) -> np.ndarray:
    """One channel on the 0..255 scale, dims already multiples of 8."""
    h, w = plane.shape
    blocks = plane.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3) - 128.0
    coef = dctn(blocks, axes=(-2, -1), norm="ortho")
    coef = np.round(coef / table) * table
    out = idctn(coef, axes=(-2, -1), norm="ortho") + 128.0
    return out.transpose(0, 2, 1, 3).reshape(h, w)


def jpeg_transform(img, quality: int):
    """Apply the quantization round trip at the given quality.

    Input is display range [0, 1]; dimensions not divisible by 8 are
    reflect-padded internally and cropped back.
    """
    arr = as_array(img)
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must be in [1, 100], got {quality}")
    h, w = arr.shape[0], arr.shape[1]
    pad_h = (-h) % 8
    pad_w = (-w) % 8
    work = arr * 255.0
    if pad_h or pad_w:
        pad = [(0, pad_h), (0, pad_w)] + [(0, 0)] * (arr.ndim - 2)
        work = np.pad(work, pad, mode="symmetric")
    qy = quality_scaled_table(LUMA_QUANT, quality)
    if arr.ndim == 3 and arr.shape[2] == 3:
        qc = quality_scaled_table(CHROMA_QUANT, quality)
        ycc = rgb_to_ycbcr(work)
        planes = [
            _quantize_plane(ycc[..., 0], qy),
            _quantize_plane(ycc[..., 1], qc),
            _quantize_plane(ycc[..., 2], qc),
        ]
        work = ycbcr_to_rgb(np.stack(planes, axis=-1))
    elif arr.ndim == 3:
        work = _quantize_plane(work[..., 0], qy)[..., None]
    else:
        work = _quantize_plane(work, qy)
    out = work[:h, :w] / 255.0
    return same_kind(img, out)
