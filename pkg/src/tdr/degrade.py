"""Synthetic degradation: blur -> downsample -> noise -> JPEG.

Operates in display range [0, 1]. Every stochastic choice made by
`synthesize` is captured in a :class:`DegradationRecord`, and `replay`
pushes a clean image through the recorded choices to reproduce the
degraded output bit for bit. Randomness comes from numpy's PCG64
generator, so a fixed seed yields the same stream on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from . import filters, jpeg
from .image import as_array, same_kind

BLUR_KINDS = ("gaussian", "mean", "median", "motion")
BLUR_KERNEL_RANGE = (3, 15)
MOTION_KERNEL_RANGE = (5, 25)


@dataclass(frozen=True)
class DegradationConfig:
    blur_prob: float = 0.5
    blur_kinds: tuple = ("gaussian", "mean", "median")
    blur_kernel_range: tuple = BLUR_KERNEL_RANGE
    motion_blur_prob: float = 0.5
    motion_kernel_range: tuple = MOTION_KERNEL_RANGE
    downsample_factor: int = 8
    noise_prob: float = 0.2
    noise_sigma_range: tuple = (0.0, 0.1)          # display units
    poisson_prob: float = 0.0
    poisson_level_range: tuple = (0.0, 10.0)
    jpeg_prob: float = 0.7
    jpeg_quality_range: tuple = (10, 65)

    def __post_init__(self):
        for name in ("blur_prob", "motion_blur_prob", "noise_prob",
                     "poisson_prob", "jpeg_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        for kind in self.blur_kinds:
            if kind not in ("gaussian", "mean", "median"):
                raise ValueError(f"unknown blur kind {kind!r}")
        lo, hi = self.blur_kernel_range
        if not (3 <= lo <= hi <= 15) or lo % 2 == 0 or hi % 2 == 0:
            raise ValueError(f"blur kernel range must be odd within [3, 15], got {lo, hi}")
        lo, hi = self.motion_kernel_range
        if not (5 <= lo <= hi <= 25) or lo % 2 == 0 or hi % 2 == 0:
            raise ValueError(f"motion kernel range must be odd within [5, 25], got {lo, hi}")
        if self.downsample_factor < 1:
            raise ValueError(f"downsample factor must be >= 1, got {self.downsample_factor}")
        if self.noise_sigma_range[0] < 0 or self.noise_sigma_range[0] > self.noise_sigma_range[1]:
            raise ValueError(f"bad noise sigma range {self.noise_sigma_range}")
        qlo, qhi = self.jpeg_quality_range
        if not (1 <= qlo <= qhi <= 100):
            raise ValueError(f"jpeg quality range must sit in [1, 100], got {qlo, qhi}")


# Built-in presets. Sigma values are display units (pixel scale / 255).
PRESETS = {
    # FFHQ-style training degradation: blur 50% sizes 3-15, motion 50% sizes
    # 5-25, 8x downsample, noise 20% sigma in [0, 0.1*255]/255, JPEG 70% q 10-65.
    "train-ffhq-style": DegradationConfig(),
    # CelebA-style test degradation: gaussian blur only, sizes 3-9, 8x down,
    # gaussian noise 5-30/255 and poisson 0-10, both 50%, JPEG 50% q 30-95.
    "test-celeba-style": DegradationConfig(
        blur_prob=0.5,
        blur_kinds=("gaussian",),
        blur_kernel_range=(3, 9),
        motion_blur_prob=0.0,
        downsample_factor=8,
        noise_prob=0.5,
        noise_sigma_range=(5.0 / 255.0, 30.0 / 255.0),
        poisson_prob=0.5,
        poisson_level_range=(0.0, 10.0),
        jpeg_prob=0.5,
        jpeg_quality_range=(30, 95),
    ),
    # Ladder-adjusted desk preset for small procedural images.
    "desk": DegradationConfig(
        blur_prob=0.5,
        blur_kinds=("gaussian", "mean", "median"),
        blur_kernel_range=(3, 7),
        motion_blur_prob=0.0,
        downsample_factor=2,
        noise_prob=0.5,
        noise_sigma_range=(0.02, 0.08),
        jpeg_prob=0.7,
        jpeg_quality_range=(10, 65),
    ),
}


@dataclass(frozen=True)
class DegradationRecord:
    """The exact choices one `synthesize` call made, in pipeline order."""

    r: int
    blur_kind: str | None = None
    blur_kernel: int | None = None
    motion_kernel: int | None = None
    motion_angle: float | None = None
    sigma: float | None = None
    noise_seed: int | None = None
    poisson_level: float | None = None
    poisson_seed: int | None = None
    quality: int | None = None

    def is_identity(self) -> bool:
        return (self.r == 1 and self.blur_kind is None and self.motion_kernel is None
                and self.sigma is None and self.poisson_level is None
                and self.quality is None)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = size // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def _motion_kernel(size: int, angle_deg: float) -> np.ndarray:
    """One-pixel-wide line through the kernel center, normalized to sum 1."""
    k = np.zeros((size, size))
    c = size // 2
    theta = np.deg2rad(angle_deg)
    dx, dy = np.cos(theta), np.sin(theta)
    for i in range(size):
        off = i - c
        x = int(round(c + off * dx))
        y = int(round(c + off * dy))
        if 0 <= x < size and 0 <= y < size:
            k[y, x] = 1.0
    return k / k.sum()


def _convolve(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    if arr.ndim == 3:
        return np.stack(
            [ndimage.convolve(arr[..., c], kernel, mode="reflect")
             for c in range(arr.shape[2])], axis=-1)
    return ndimage.convolve(arr, kernel, mode="reflect")


def blur(img, kind: str, kernel_size: int, angle: float | None = None):
    """Apply one blur kernel with reflect padding. Gaussian sigma defaults
    to kernel_size / 6; kernel_size 1 is the identity for every kind."""
    arr = as_array(img)
    if kind not in BLUR_KINDS:
        raise ValueError(f"unknown blur kind {kind!r}")
    if kernel_size == 1:
        return same_kind(img, arr)
    if kernel_size % 2 == 0:
        raise ValueError(f"kernel size must be odd, got {kernel_size}")
    lo, hi = MOTION_KERNEL_RANGE if kind == "motion" else BLUR_KERNEL_RANGE
    if not lo <= kernel_size <= hi:
        raise ValueError(f"{kind} kernel size {kernel_size} outside [{lo}, {hi}]")
    if kind == "gaussian":
        out = _convolve(arr, _gaussian_kernel(kernel_size, kernel_size / 6.0))
    elif kind == "mean":
        k = np.full((kernel_size, kernel_size), 1.0 / kernel_size ** 2)
        out = _convolve(arr, k)
    elif kind == "median":
        size = (kernel_size, kernel_size) if arr.ndim == 2 else (kernel_size, kernel_size, 1)
        out = ndimage.median_filter(arr, size=size, mode="reflect")
    else:
        if angle is None:
            raise ValueError("motion blur requires an angle")
        out = _convolve(arr, _motion_kernel(kernel_size, angle))
    return same_kind(img, out)


def downsample(img, r: int):
    """Area-average decimation by r (the `downarrow_r` stage)."""
    return filters.area_downsample(img, r)


def add_gaussian_noise(img, sigma: float, rng: np.random.Generator):
    """img + sigma * eps with seeded standard-normal eps; no clamping."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    arr = as_array(img)
    if sigma == 0:
        return same_kind(img, arr)
    return same_kind(img, arr + sigma * rng.standard_normal(arr.shape))


def add_poisson_noise(img, level: float, rng: np.random.Generator):
    """Per-pixel Poisson resampling of scaled intensities.

    `level` plays the role of a noise strength on the 0..255 scale: the
    image is scaled by 255/level, Poisson-sampled, and scaled back, so the
    per-pixel std is sqrt(x * level / 255). level <= 0 is the identity.
    """
    if level < 0:
        raise ValueError(f"poisson level must be >= 0, got {level}")
    arr = as_array(img)
    if level == 0:
        return same_kind(img, arr)
    scale = 255.0 / level
    lam = np.clip(arr, 0.0, None) * scale
    return same_kind(img, rng.poisson(lam).astype(np.float64) / scale)


def jpeg_transform(img, quality: int):
    """Baseline-JPEG-equivalent quantization round trip (see `tdr.jpeg`)."""
    return jpeg.jpeg_transform(img, quality)


def _odd_in(rng: np.random.Generator, lo: int, hi: int) -> int:
    # uniform over the odd sizes in [lo, hi]
    count = (hi - lo) // 2 + 1
    return lo + 2 * int(rng.integers(count))


def synthesize(x, cfg: DegradationConfig, rng: np.random.Generator):
    """Run the stochastic pipeline blur -> downsample -> noise -> JPEG.

    Returns (y, record); replaying the record through the deterministic
    sub-ops reproduces y exactly.
    """
    out = x
    kind = None
    blur_kernel = None
    if rng.random() < cfg.blur_prob:
        kind = cfg.blur_kinds[int(rng.integers(len(cfg.blur_kinds)))]
        blur_kernel = _odd_in(rng, *cfg.blur_kernel_range)
    motion_kernel = None
    motion_angle = None
    if rng.random() < cfg.motion_blur_prob:
        motion_kernel = _odd_in(rng, *cfg.motion_kernel_range)
        motion_angle = float(rng.uniform(0.0, 180.0))
    sigma = None
    noise_seed = None
    if rng.random() < cfg.noise_prob:
        sigma = float(rng.uniform(*cfg.noise_sigma_range))
        noise_seed = int(rng.integers(2 ** 63))
    poisson_level = None
    poisson_seed = None
    if rng.random() < cfg.poisson_prob:
        poisson_level = float(rng.uniform(*cfg.poisson_level_range))
        poisson_seed = int(rng.integers(2 ** 63))
    quality = None
    if rng.random() < cfg.jpeg_prob:
        qlo, qhi = cfg.jpeg_quality_range
        quality = int(rng.integers(qlo, qhi + 1))

    record = DegradationRecord(
        r=cfg.downsample_factor, blur_kind=kind, blur_kernel=blur_kernel,
        motion_kernel=motion_kernel, motion_angle=motion_angle,
        sigma=sigma, noise_seed=noise_seed,
        poisson_level=poisson_level, poisson_seed=poisson_seed,
        quality=quality,
    )
    return replay(out, record), record


def replay(x, record: DegradationRecord):
    """Deterministically apply a recorded choice set in pipeline order."""
    out = x
    if record.blur_kind is not None:
        out = blur(out, record.blur_kind, record.blur_kernel)
    if record.motion_kernel is not None:
        out = blur(out, "motion", record.motion_kernel, angle=record.motion_angle)
    if record.r > 1:
        out = downsample(out, record.r)
    if record.sigma is not None:
        out = add_gaussian_noise(out, record.sigma,
                                 np.random.default_rng(record.noise_seed))
    if record.poisson_level is not None:
        out = add_poisson_noise(out, record.poisson_level,
                                np.random.default_rng(record.poisson_seed))
    if record.quality is not None:
        out = jpeg_transform(out, record.quality)
    return out


def derive_seed(seed: int, index: int) -> int:
    """Per-image seed: seed XOR a splitmix-spread index (documented scheme)."""
    return (seed ^ ((index + 1) * 0x9E3779B97F4A7C15)) & 0xFFFFFFFFFFFFFFFF
