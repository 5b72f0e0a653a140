import numpy as np
import pytest

from deblurtext.raster import Raster


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_raster(rng, width=16, height=12, lo=0.0, hi=1.0):
    return Raster(rng.uniform(lo, hi, size=(height, width)))


def make_text_image(rng, width=96, height=64, blocks=4, background=0.9, ink=0.08):
    """High-contrast block 'text': filled bars on a light background.

    Returns (raster, boxes) where boxes are (x_min, y_min, x_max, y_max)
    pixel rectangles around each block.
    """
    img = np.full((height, width), background, dtype=np.float64)
    boxes = []
    for _ in range(blocks):
        bw = int(rng.integers(12, max(13, width // 3)))
        bh = int(rng.integers(6, max(7, height // 4)))
        x0 = int(rng.integers(1, max(2, width - bw - 1)))
        y0 = int(rng.integers(1, max(2, height - bh - 1)))
        stride = int(rng.integers(2, 5))
        for x in range(x0, x0 + bw, stride):
            img[y0 : y0 + bh, x : x + max(1, stride - 1)] = ink
        boxes.append((x0, y0, x0 + bw, y0 + bh))
    return Raster(img), boxes
