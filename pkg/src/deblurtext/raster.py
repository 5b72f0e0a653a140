"""Single-channel image grids and direct 2-D convolution with explicit borders.

Everything downstream (focus measure, deconvolution) runs on `Raster` values:
immutable row-major float64 grids with intensities nominally in [0, 1].
Kernels in scope are small (deblurring PSFs are at most 7x7), so convolution
is done directly in the spatial domain; no FFT path is provided.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class BorderPolicy(Enum):
    """How out-of-range reads are resolved at the image edge."""

    REPLICATE = "replicate"
    REFLECT = "reflect"
    ZERO_PAD = "zero"


_PAD_MODE = {
    BorderPolicy.REPLICATE: "edge",
    BorderPolicy.REFLECT: "symmetric",
    BorderPolicy.ZERO_PAD: "constant",
}


@dataclass(frozen=True)
class Raster:
    """Immutable single-channel image: a (height, width) float64 grid.

    All samples must be finite. Values are not clamped; [0, 1] is the
    nominal working range and 8-bit inputs are divided by 255 on load.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"raster must be a 2-D grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("raster samples must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def full(cls, width: int, height: int, value: float) -> "Raster":
        return cls(np.full((height, width), value, dtype=np.float64))


@dataclass(frozen=True)
class Kernel:
    """Small convolution kernel, row-major (kh, kw) float64 weights."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"kernel must be a 2-D grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("kernel weights must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def kw(self) -> int:
        return self.data.shape[1]

    @property
    def kh(self) -> int:
        return self.data.shape[0]


def flip180(k: Kernel) -> Kernel:
    """Rotate a kernel by 180 degrees (reverse both axes)."""
    return Kernel(k.data[::-1, ::-1])


def to_grayscale(r: Raster, g: Raster, b: Raster) -> Raster:
    """Combine RGB channel rasters into BT.601 luma (0.299 R + 0.587 G + 0.114 B)."""
    if not (r.data.shape == g.data.shape == b.data.shape):
        raise ValueError(
            "channel dimensions differ: "
            f"r={r.data.shape} g={g.data.shape} b={b.data.shape}"
        )
    return Raster(0.299 * r.data + 0.587 * g.data + 0.114 * b.data)


def _check_reflect_extent(img: Raster, k: Kernel) -> None:
    # Single-pass symmetric padding only reaches one image extent per side.
    if k.kh > 2 * img.height or k.kw > 2 * img.width:
        raise ValueError(
            f"kernel {k.kh}x{k.kw} exceeds twice the image extent "
            f"{img.height}x{img.width} under Reflect"
        )


def convolve2d(img: Raster, k: Kernel, border: BorderPolicy = BorderPolicy.REPLICATE) -> Raster:
    """Same-size true convolution (kernel flipped) of `img` with `k`.

    The kernel is centered at floor(k/2) along each axis; output pixels are
        out[r, c] = sum_{i,j} k[i, j] * img[r - i + ci, c - j + cj]
    with out-of-range reads resolved by the border policy.
    """
    if border is BorderPolicy.REFLECT:
        _check_reflect_extent(img, k)
    kh, kw = k.kh, k.kw
    ci, cj = kh // 2, kw // 2
    pads = ((kh - 1 - ci, ci), (kw - 1 - cj, cj))
    padded = np.pad(img.data, pads, mode=_PAD_MODE[border])
    h, w = img.data.shape
    out = np.zeros((h, w), dtype=np.float64)
    kd = k.data
    for i in range(kh):
        for j in range(kw):
            out += kd[i, j] * padded[kh - 1 - i : kh - 1 - i + h, kw - 1 - j : kw - 1 - j + w]
    return Raster(out)


def correlate2d(img: Raster, k: Kernel, border: BorderPolicy = BorderPolicy.REPLICATE) -> Raster:
    """Same-size cross-correlation: convolution with the 180-degree-flipped kernel.

    Defined exactly as convolve2d(img, flip180(k), border) so the flip
    identity holds bitwise for every kernel shape, even ones with even dims.
    """
    return convolve2d(img, flip180(k), border)
