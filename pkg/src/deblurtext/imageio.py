"""PNG/JPEG loading and saving for rasters.

Files are decoded to 8-bit RGB and divided by 255; rasters are re-encoded
to 8-bit grayscale PNG with round-half-even quantization, which is what an
external detector receives.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .raster import Raster, to_grayscale


def load_rgb(path: str | Path) -> tuple[Raster, Raster, Raster]:
    """Decode an image file into (r, g, b) channel rasters scaled to [0, 1]."""
    with Image.open(path) as im:
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return Raster(rgb[:, :, 0]), Raster(rgb[:, :, 1]), Raster(rgb[:, :, 2])


def load_grayscale(path: str | Path) -> Raster:
    """Decode an image file and convert it to a single luma raster."""
    r, g, b = load_rgb(path)
    return to_grayscale(r, g, b)


def encode_grayscale_png(img: Raster) -> bytes:
    """Encode a raster as 8-bit grayscale PNG bytes, clamping to [0, 1] first."""
    scaled = np.clip(img.data, 0.0, 1.0) * 255.0
    quantized = np.rint(scaled).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(quantized, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def save_grayscale_png(img: Raster, path: str | Path) -> None:
    """Write a raster as an 8-bit grayscale PNG."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(encode_grayscale_png(img))
