"""Pixel containers and value-range conventions.

Images are float64 numpy arrays shaped (H, W) for grayscale or (H, W, C)
for multichannel, wrapped in :class:`Image` together with the value range
they live in: "model" (nominally [-1, 1], where diffusion states operate)
or "display" ([0, 1], where files and metrics operate). Intermediate
diffusion states may exceed the nominal range; clamping happens only at
export time.

Most numeric operations in this package accept either an :class:`Image`
or a bare ndarray and return the matching kind, so batched arrays can be
pushed through the same code paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MODEL = "model"
DISPLAY = "display"


@dataclass(frozen=True)
class Image:
    """A raster of finite floats plus the value-range tag it lives in."""

    data: np.ndarray
    value_range: str = MODEL

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim not in (2, 3):
            raise ValueError(f"image must be (H, W) or (H, W, C), got shape {data.shape}")
        if data.ndim == 3 and data.shape[2] not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {data.shape[2]}")
        if not np.all(np.isfinite(data)):
            raise ValueError("image contains non-finite values")
        if self.value_range not in (MODEL, DISPLAY):
            raise ValueError(f"unknown value range {self.value_range!r}")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    def with_data(self, data) -> "Image":
        return Image(data, self.value_range)

    def tobytes(self) -> bytes:
        return self.data.tobytes()


def as_array(img) -> np.ndarray:
    """Unwrap an Image (or pass through a bare array) as float64."""
    if isinstance(img, Image):
        return img.data
    return np.asarray(img, dtype=np.float64)


def same_kind(template, data):
    """Wrap `data` like `template`: an Image begets an Image with the same tag."""
    if isinstance(template, Image):
        return Image(np.asarray(data, dtype=np.float64), template.value_range)
    return np.asarray(data, dtype=np.float64)


def to_model(img: Image) -> Image:
    """Map display [0, 1] to model [-1, 1]; model images pass through."""
    if img.value_range == MODEL:
        return img
    return Image(img.data * 2.0 - 1.0, MODEL)


def to_display(img: Image) -> Image:
    """Map model [-1, 1] to display [0, 1] without clamping."""
    if img.value_range == DISPLAY:
        return img
    return Image((img.data + 1.0) * 0.5, DISPLAY)


def clamp_display(img: Image) -> Image:
    """Export-time clamp to [0, 1]; input is converted to display range first."""
    disp = to_display(img)
    return Image(np.clip(disp.data, 0.0, 1.0), DISPLAY)
