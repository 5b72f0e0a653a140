"""Variance-of-Laplacian focus measure and blurry/non-blurry classification.

An in-focus image has many sharp intensity transitions, so its Laplacian
response spreads widely; a blurry image has few edges and a narrow response.
The measure is the population variance of the Laplacian response on the
0-255 intensity scale, which keeps the conventional threshold of 100
meaningful for 8-bit photographs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .raster import Raster

DEFAULT_THRESHOLD = 100.0


class LaplacianKernel(Enum):
    FOUR_NEIGHBOR = "4-neighbor"
    EIGHT_NEIGHBOR = "8-neighbor"


class FocusLabel(Enum):
    BLURRY = "blurry"
    NON_BLURRY = "non-blurry"


@dataclass(frozen=True)
class FocusVerdict:
    """Focus measure plus the threshold it was compared against."""

    measure: float
    threshold: float
    label: FocusLabel


def laplacian_response(img: Raster, kernel: LaplacianKernel = LaplacianKernel.FOUR_NEIGHBOR) -> Raster:
    """Second-derivative response under a replicated border.

    Equals convolution with [[0,1,0],[1,-4,1],[0,1,0]] (or the 8-neighbor
    variant). Neighbor terms are summed in mirror-symmetric pairs so the
    response of a flipped image is the bitwise flip of the response.
    """
    p = np.pad(img.data, 1, mode="edge")
    h, w = img.data.shape
    c = img.data
    up = p[0:h, 1 : w + 1]
    down = p[2 : h + 2, 1 : w + 1]
    left = p[1 : h + 1, 0:w]
    right = p[1 : h + 1, 2 : w + 2]
    if kernel is LaplacianKernel.FOUR_NEIGHBOR:
        out = (up + down) + (left + right) - 4.0 * c
    else:
        ul = p[0:h, 0:w]
        ur = p[0:h, 2 : w + 2]
        dl = p[2 : h + 2, 0:w]
        dr = p[2 : h + 2, 2 : w + 2]
        out = ((ul + ur) + (dl + dr)) + ((up + down) + (left + right)) - 8.0 * c
    return Raster(out)


def focus_measure(img: Raster, kernel: LaplacianKernel = LaplacianKernel.FOUR_NEIGHBOR) -> float:
    """Population variance of the Laplacian response, on the 0-255 scale.

    Sums are exact (math.fsum), so the result is independent of pixel
    order and therefore bitwise identical under image flips.
    """
    if img.data.size < 2:
        raise ValueError("focus measure needs at least 2 pixels")
    resp = laplacian_response(img, kernel).data * 255.0
    n = resp.size
    mean = math.fsum(resp.ravel()) / n
    return math.fsum((resp - mean).ravel() ** 2) / n


def verdict_from_measure(measure: float, threshold: float = DEFAULT_THRESHOLD) -> FocusVerdict:
    """Strict comparison: the image counts as non-blurry only above the threshold."""
    if threshold <= 0:
        raise ConfigurationError(f"threshold must be positive, got {threshold}")
    label = FocusLabel.NON_BLURRY if measure > threshold else FocusLabel.BLURRY
    return FocusVerdict(measure=measure, threshold=threshold, label=label)


def classify(
    img: Raster,
    threshold: float = DEFAULT_THRESHOLD,
    kernel: LaplacianKernel = LaplacianKernel.FOUR_NEIGHBOR,
) -> FocusVerdict:
    """Classify an image as blurry or non-blurry by its focus measure."""
    if threshold <= 0:
        raise ConfigurationError(f"threshold must be positive, got {threshold}")
    return verdict_from_measure(focus_measure(img, kernel), threshold)
