"""Blind image restoration by alternating Richardson-Lucy updates.

Both the sharp image and the point spread function are unknown; starting
from a uniform PSF of chosen dimensions, each iteration multiplicatively
updates the image estimate against the observed blur, then the PSF estimate
against the image. Negative values are clamped after every update and the
PSF is renormalized to unit sum, optionally symmetrized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DeconvolutionError
from .raster import BorderPolicy, Kernel, Raster, convolve2d, correlate2d

EPSILON = 1e-6
MAX_PSF_DIM = 7
DEFAULT_ITERATIONS = 10
_UNIT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Psf:
    """Non-negative kernel with unit sum, at most 7 pixels per side."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"PSF must be a 2-D grid, got shape {arr.shape}")
        kh, kw = arr.shape
        if not (1 <= kh <= MAX_PSF_DIM and 1 <= kw <= MAX_PSF_DIM):
            raise ValueError(f"PSF dims must be within 1..{MAX_PSF_DIM}, got {kh}x{kw}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("PSF weights must be finite")
        if np.any(arr < 0):
            raise ValueError("PSF weights must be non-negative")
        if abs(float(arr.sum()) - 1.0) > _UNIT_SUM_TOL:
            raise ValueError(f"PSF must sum to 1, got {float(arr.sum())!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def kw(self) -> int:
        return self.data.shape[1]

    @property
    def kh(self) -> int:
        return self.data.shape[0]

    def to_kernel(self) -> Kernel:
        return Kernel(self.data)

    def to_json_dict(self) -> dict:
        return {"kw": self.kw, "kh": self.kh, "weights": [float(w) for w in self.data.ravel()]}


@dataclass(frozen=True)
class DeconvResult:
    """Restored image, final PSF estimate, and the per-iteration residual trace."""

    restored: Raster
    psf_estimate: Psf
    iterations_run: int
    objective_trace: list[float]


def init_psf(x: int, y: int) -> Psf:
    """Uniform starting PSF: x rows (vertical extent) by y columns, all 1/(x*y)."""
    if not (1 <= x <= MAX_PSF_DIM and 1 <= y <= MAX_PSF_DIM):
        raise ConfigurationError(f"PSF dims must be within 1..{MAX_PSF_DIM}, got ({x}, {y})")
    return Psf(np.full((x, y), 1.0 / (x * y)))


def enforce_psf_constraints(h: Psf | np.ndarray, symmetric: bool = False) -> Psf:
    """Clamp negatives, optionally average with the 180-degree rotation, renormalize."""
    arr = h.data if isinstance(h, Psf) else np.asarray(h, dtype=np.float64)
    arr = np.maximum(arr, 0.0)
    if symmetric:
        arr = 0.5 * (arr + arr[::-1, ::-1])
    total = float(arr.sum())
    if total <= 0.0:
        raise DeconvolutionError("PSF collapsed to all zeros after clamping")
    return Psf(arr / total)


def _psf_update_factor(ratio: np.ndarray, f: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Correlation of the blur ratio with the image estimate over the PSF support.

    Each PSF cell only accumulates over the overlap where its shifted image
    index is in range, so no border values are fabricated inside the estimate.
    """
    height, width = ratio.shape
    ci, cj = kh // 2, kw // 2
    factor = np.empty((kh, kw), dtype=np.float64)
    for i in range(kh):
        dr = ci - i
        r0, r1 = max(0, -dr), min(height, height - dr)
        for j in range(kw):
            dc = cj - j
            c0, c1 = max(0, -dc), min(width, width - dc)
            factor[i, j] = float(
                np.sum(ratio[r0:r1, c0:c1] * f[r0 + dr : r1 + dr, c0 + dc : c1 + dc])
            )
    return factor


def blind_deconvolve(
    img: Raster,
    psf0: Psf,
    iterations: int = DEFAULT_ITERATIONS,
    symmetric: bool = False,
) -> DeconvResult:
    """Jointly estimate a restored image and PSF from a single blurry image.

    The observed image is floored at EPSILON so the multiplicative updates
    stay positive; ratio denominators get the same floor. The restored image
    is clamped to [0, 1] only at the end.

    Raises DeconvolutionError (with the iteration index) if the estimates
    go non-finite mid-run.
    """
    if iterations < 1:
        raise ConfigurationError(f"iterations must be >= 1, got {iterations}")
    d = np.maximum(img.data, EPSILON)
    observed = Raster(d)
    f = Raster(d)
    h = psf0
    trace: list[float] = []
    for it in range(1, iterations + 1):
        reblur = convolve2d(f, h.to_kernel(), BorderPolicy.REPLICATE).data
        ratio = Raster(d / np.maximum(reblur, EPSILON))
        f_arr = f.data * correlate2d(ratio, h.to_kernel(), BorderPolicy.REPLICATE).data
        if not np.all(np.isfinite(f_arr)):
            raise DeconvolutionError(f"image estimate went non-finite at iteration {it}")
        f = Raster(np.maximum(f_arr, 0.0))

        reblur = convolve2d(f, h.to_kernel(), BorderPolicy.REPLICATE).data
        ratio_arr = d / np.maximum(reblur, EPSILON)
        h_arr = h.data * _psf_update_factor(ratio_arr, f.data, h.kh, h.kw)
        if not np.all(np.isfinite(h_arr)):
            raise DeconvolutionError(f"PSF estimate went non-finite at iteration {it}")
        h = enforce_psf_constraints(h_arr, symmetric=symmetric)

        residual = convolve2d(f, h.to_kernel(), BorderPolicy.REPLICATE).data - observed.data
        trace.append(float(np.mean(np.abs(residual))))
    restored = Raster(np.clip(f.data, 0.0, 1.0))
    return DeconvResult(
        restored=restored, psf_estimate=h, iterations_run=iterations, objective_trace=trace
    )
