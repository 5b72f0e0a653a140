"""Pluggable text detector behind one contract.

Three sources speak it: directories of precomputed `res_<id>.txt` files, an
external command run per image over a file protocol, and a deterministic
mock that perturbs injected ground truth for self-contained testing.

A detector failure (missing file, nonzero exit, timeout, unparseable output)
never raises out of `detect`; it comes back as an empty detection with the
error recorded so a batch always completes.
"""

from __future__ import annotations

import hashlib
import shlex
import subprocess
import tempfile
import threading
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ParseError
from .imageio import encode_grayscale_png
from .raster import Raster
from .scoring import AnnotatedBox, ImageAnnotations, parse_detections

DEFAULT_TIMEOUT_S = 120.0
_PLACEHOLDERS = ("{input_image}", "{output_file}")


@dataclass(frozen=True)
class PerturbationSpec:
    """Seeded mock perturbation: drop a fraction of boxes, jitter the rest."""

    drop_fraction: float = 0.0
    jitter_px: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.drop_fraction <= 1.0:
            raise ConfigurationError(f"drop_fraction must be in [0,1], got {self.drop_fraction}")
        if self.jitter_px < 0:
            raise ConfigurationError(f"jitter_px must be >= 0, got {self.jitter_px}")


@dataclass
class PrecomputedSource:
    """Detections read from `res_<image_id>.txt` files in a directory."""

    directory: Path

    def __post_init__(self):
        self.directory = Path(self.directory)


@dataclass
class ExternalCommandSource:
    """Detector run as a child process: image in as PNG, boxes out as text.

    The command template must contain the {input_image} and {output_file}
    placeholders. With a cache directory set, outputs are reused keyed by
    (image content hash, preprocessing descriptor) and the command is never
    re-invoked for an image whose output already exists.
    """

    command_template: str
    timeout_s: float = DEFAULT_TIMEOUT_S
    cache_dir: Path | None = None
    _cache_lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def __post_init__(self):
        for placeholder in _PLACEHOLDERS:
            if placeholder not in self.command_template:
                raise ConfigurationError(
                    f"command template must contain {placeholder}: {self.command_template!r}"
                )
        if self.cache_dir is not None:
            self.cache_dir = Path(self.cache_dir)


@dataclass
class MockSource:
    """Test double: returns injected ground truth, perturbed per spec."""

    spec: PerturbationSpec = field(default_factory=PerturbationSpec)
    ground_truth: dict[str, ImageAnnotations] | None = None


DetectorSource = PrecomputedSource | ExternalCommandSource | MockSource


@dataclass(frozen=True)
class DetectorResult:
    annotations: ImageAnnotations
    error: str | None = None
    from_cache: bool = False


def _empty(image_id: str, error: str) -> DetectorResult:
    return DetectorResult(ImageAnnotations(image_id, ()), error=error)


def _image_rng(spec: PerturbationSpec, image_id: str) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((spec.seed, zlib.crc32(image_id.encode("utf-8"))))
    )


def perturb_boxes(gt: ImageAnnotations, spec: PerturbationSpec) -> ImageAnnotations:
    """Drop round(drop_fraction * n) boxes and jitter the survivors' corners.

    A pure function of (ground truth, spec, seed): the RNG stream is derived
    from the spec seed and the image id.
    """
    rng = _image_rng(spec, gt.image_id)
    n = len(gt.boxes)
    n_drop = int(round(spec.drop_fraction * n))
    dropped = set(rng.choice(n, size=n_drop, replace=False).tolist()) if n_drop else set()
    boxes = []
    for idx, box in enumerate(gt.boxes):
        if idx in dropped:
            continue
        if spec.jitter_px > 0:
            jx0, jy0, jx1, jy1 = rng.uniform(-spec.jitter_px, spec.jitter_px, size=4)
            x0, x1 = sorted((box.x_min + jx0, box.x_max + jx1))
            y0, y1 = sorted((box.y_min + jy0, box.y_max + jy1))
            box = AnnotatedBox(x0, y0, x1, y1)
        else:
            box = AnnotatedBox(box.x_min, box.y_min, box.x_max, box.y_max)
        boxes.append(box)
    return ImageAnnotations(gt.image_id, tuple(boxes))


def _detect_precomputed(source: PrecomputedSource, image_id: str) -> DetectorResult:
    path = source.directory / f"res_{image_id}.txt"
    if not path.is_file():
        return _empty(image_id, f"missing detection file {path}")
    try:
        return DetectorResult(parse_detections(path.read_text(encoding="utf-8"), image_id))
    except ParseError as exc:
        return _empty(image_id, f"unparseable detection file {path}: {exc}")


def _cache_key(png_bytes: bytes, descriptor: str) -> str:
    digest = hashlib.sha256()
    digest.update(png_bytes)
    digest.update(b"\x00")
    digest.update(descriptor.encode("utf-8"))
    return digest.hexdigest()[:24]


def _detect_external(
    source: ExternalCommandSource, image_id: str, image: Raster, descriptor: str
) -> DetectorResult:
    png_bytes = encode_grayscale_png(image)
    cache_path = None
    if source.cache_dir is not None:
        cache_path = source.cache_dir / f"res_{_cache_key(png_bytes, descriptor)}.txt"
        if cache_path.is_file():
            try:
                return DetectorResult(
                    parse_detections(cache_path.read_text(encoding="utf-8"), image_id),
                    from_cache=True,
                )
            except ParseError as exc:
                return _empty(image_id, f"unparseable cached detections {cache_path}: {exc}")

    with tempfile.TemporaryDirectory(prefix="deblurtext-det-") as tmp:
        input_path = Path(tmp) / f"{image_id}.png"
        output_path = Path(tmp) / f"res_{image_id}.txt"
        input_path.write_bytes(png_bytes)
        argv = [
            token.replace("{input_image}", str(input_path)).replace(
                "{output_file}", str(output_path)
            )
            for token in shlex.split(source.command_template)
        ]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=source.timeout_s
            )
        except subprocess.TimeoutExpired:
            return _empty(image_id, f"detector timed out after {source.timeout_s}s")
        except OSError as exc:
            return _empty(image_id, f"detector could not start: {exc}")
        if proc.returncode != 0:
            stderr = proc.stderr.strip()[-500:]
            return _empty(image_id, f"detector exited {proc.returncode}: {stderr}")
        if not output_path.is_file():
            return _empty(image_id, "detector wrote no output file")
        text = output_path.read_text(encoding="utf-8")

    try:
        annotations = parse_detections(text, image_id)
    except ParseError as exc:
        return _empty(image_id, f"unparseable detector output: {exc}")
    if cache_path is not None:
        with source._cache_lock:
            cache_path.parent.mkdir(parents=True, exist_ok=True)
            tmp_path = cache_path.with_suffix(".tmp")
            tmp_path.write_text(text, encoding="utf-8")
            tmp_path.replace(cache_path)
    return DetectorResult(annotations)


def _detect_mock(source: MockSource, image_id: str) -> DetectorResult:
    if source.ground_truth is None:
        raise ConfigurationError("mock detector has no ground truth injected")
    gt = source.ground_truth.get(image_id)
    if gt is None:
        return _empty(image_id, f"mock has no ground truth for {image_id}")
    visible = ImageAnnotations(image_id, tuple(b for b in gt.boxes if not b.dont_care))
    return DetectorResult(perturb_boxes(visible, source.spec))


def detect(
    source: DetectorSource, image_id: str, image: Raster, descriptor: str = ""
) -> DetectorResult:
    """Run one image through the configured detector source.

    `descriptor` names the preprocessing that produced `image` and takes
    part in the external-command cache key.
    """
    if isinstance(source, PrecomputedSource):
        return _detect_precomputed(source, image_id)
    if isinstance(source, ExternalCommandSource):
        return _detect_external(source, image_id, image, descriptor)
    if isinstance(source, MockSource):
        return _detect_mock(source, image_id)
    raise ConfigurationError(f"unknown detector source {source!r}")
