"""Seeded synthetic scene-text corpus with exact ground truth.

Images are glyph-like bar blocks on a light background; half of the corpus
is additionally blurred with known box or Gaussian kernels. Everything is a
pure function of the seed, so a corpus regenerates byte-identically. Each
corpus directory doubles as a pipeline dataset: `<id>.png` next to
`gt_<id>.txt`, plus a manifest recording every image's true blur kernel.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .imageio import save_grayscale_png
from .raster import BorderPolicy, Kernel, Raster, convolve2d

DEFAULT_BLUR_KINDS = ("box:1x3", "box:3x1", "box:3x3")


def box_kernel(kh: int, kw: int) -> Kernel:
    return Kernel(np.full((kh, kw), 1.0 / (kh * kw)))


def gaussian_kernel(sigma: float, radius: int | None = None) -> Kernel:
    """Normalized 2-D Gaussian; default radius covers three standard deviations."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if radius is None:
        radius = max(1, math.ceil(3.0 * sigma))
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(ax**2) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return Kernel(k / k.sum())


def _kernel_from_spec(spec: str) -> Kernel:
    kind, _, arg = spec.partition(":")
    if kind == "box":
        kh, kw = (int(v) for v in arg.split("x"))
        return box_kernel(kh, kw)
    if kind == "gaussian":
        return gaussian_kernel(float(arg))
    raise ValueError(f"unknown blur kind {spec!r}")


def _render_words(rng: np.random.Generator, width: int, height: int):
    """Draw 2-5 glyph-like 'words': dense grids of 2px ink cells.

    The cell grid puts high-frequency structure along both axes, so box
    blurs of any orientation measurably soften the blocks.
    """
    img = np.full((height, width), 0.92, dtype=np.float64)
    n_words = int(rng.integers(4, 6))
    boxes = []
    attempts = 0
    cell = 2
    ink = 0.06
    while len(boxes) < n_words and attempts < 80:
        attempts += 1
        bw = int(rng.integers(width // 4, width // 3 + 1))
        bh = int(rng.integers(height // 5, height // 4 + 1))
        x0 = int(rng.integers(2, width - bw - 2))
        y0 = int(rng.integers(2, height - bh - 2))
        if any(
            x0 < bx1 + 3 and bx0 < x0 + bw + 3 and y0 < by1 + 3 and by0 < y0 + bh + 3
            for bx0, by0, bx1, by1 in boxes
        ):
            continue
        cells = rng.random(((bh + cell - 1) // cell, (bw + cell - 1) // cell)) < 0.55
        patch = np.kron(cells, np.ones((cell, cell)))[:bh, :bw]
        region = img[y0 : y0 + bh, x0 : x0 + bw]
        img[y0 : y0 + bh, x0 : x0 + bw] = np.where(patch > 0, ink, region)
        boxes.append((x0, y0, x0 + bw, y0 + bh))
    noise = rng.normal(0.0, 0.005, size=img.shape)
    return np.clip(img + noise, 0.0, 1.0), boxes


def generate_synthetic_corpus(
    n: int,
    seed: int,
    out: str | Path,
    blur_kinds: tuple[str, ...] = DEFAULT_BLUR_KINDS,
) -> dict:
    """Write an n-image corpus under `out` and return its manifest.

    The first ceil(n/2) images stay sharp; the rest are forward-blurred with
    kernels cycling through `blur_kinds`. Sharp originals of blurred images
    are kept under originals/ so restoration quality can be scored.
    """
    if n < 1:
        raise ValueError(f"corpus size must be >= 1, got {n}")
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "originals").mkdir(exist_ok=True)
    n_sharp = (n + 1) // 2
    entries = []
    for idx in range(n):
        rng = np.random.default_rng(np.random.SeedSequence((seed, idx)))
        width = int(rng.integers(128, 161))
        height = int(rng.integers(88, 113))
        pixels, boxes = _render_words(rng, width, height)
        image_id = f"synth_{idx:03d}"
        image_name = f"{image_id}.png"
        gt_name = f"gt_{image_id}.txt"
        blur_spec = None
        original_name = None
        if idx >= n_sharp:
            blur_spec = blur_kinds[(idx - n_sharp) % len(blur_kinds)]
            original_name = f"originals/{image_id}.png"
            save_grayscale_png(Raster(pixels), out_dir / original_name)
            pixels = convolve2d(
                Raster(pixels), _kernel_from_spec(blur_spec), BorderPolicy.REPLICATE
            ).data
        save_grayscale_png(Raster(pixels), out_dir / image_name)
        gt_lines = [
            f'{x0}, {y0}, {x1}, {y1}, "WORD{i}"' for i, (x0, y0, x1, y1) in enumerate(boxes)
        ]
        (out_dir / gt_name).write_text("\n".join(gt_lines) + "\n", encoding="utf-8")
        entries.append(
            {
                "image_id": image_id,
                "image": image_name,
                "gt": gt_name,
                "blurred": blur_spec is not None,
                "kernel": blur_spec,
                "original": original_name,
                "boxes": [list(b) for b in boxes],
            }
        )
    manifest = {"seed": seed, "count": n, "images": entries}
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest


def calibrate_threshold(measures: list[float], blurry: list[bool]) -> tuple[float, float]:
    """Pick the focus threshold best separating blurry from sharp measures.

    Candidates are midpoints between adjacent sorted measures; an image is
    predicted blurry when its measure is <= the threshold (the classifier's
    strict-greater rule). Returns (threshold, achieved accuracy).
    """
    if len(measures) != len(blurry) or not measures:
        raise ValueError("measures and labels must be equal-length, non-empty")
    values = sorted(set(measures))
    candidates = [values[0] / 2.0]
    candidates += [(a + b) / 2.0 for a, b in zip(values, values[1:])]
    candidates.append(values[-1] * 2.0)
    best_thr, best_acc = candidates[0], -1.0
    total = len(measures)
    for thr in candidates:
        correct = sum(
            1 for m, is_blur in zip(measures, blurry) if (m <= thr) == is_blur
        )
        acc = correct / total
        if acc > best_acc:
            best_thr, best_acc = thr, acc
    return best_thr, best_acc
