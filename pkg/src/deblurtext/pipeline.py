"""End-to-end orchestration: classify, conditionally deblur, detect, score.

A run walks a dataset directory of images with matched `gt_<id>.txt` files,
measures each image's focus, optionally restores it by blind deconvolution
(every image, or only the ones classified blurry), hands it to the detector
bridge, and scores detections per image plus micro-aggregated. Reports are
persisted as JSON (full precision, raw tallies) and CSV.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .blur import DEFAULT_THRESHOLD, FocusLabel, classify
from .deconv import DEFAULT_ITERATIONS, blind_deconvolve, init_psf
from .detector import DetectorSource, ExternalCommandSource, MockSource, PrecomputedSource, detect
from .errors import ConfigurationError, DataError
from .imageio import load_grayscale
from .raster import Raster
from .scoring import EvalScores, ImageAnnotations, MatchMode, aggregate, parse_gt_icdar2013, score_image

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class PipelineMode(Enum):
    BASELINE = "baseline"
    DEBLUR_ALL = "deblur-all"
    DEBLUR_BLURRY_ONLY = "deblur-blurry"


@dataclass
class RunConfig:
    dataset_dir: Path
    detector: DetectorSource
    mode: PipelineMode = PipelineMode.BASELINE
    psf_dims: tuple[int, int] | None = None
    threshold: float = DEFAULT_THRESHOLD
    iterations: int = DEFAULT_ITERATIONS
    match_mode: MatchMode = MatchMode.IOU_AT_50
    output_dir: Path | None = None
    parallelism: int = 1
    failure_budget: int = 0

    def __post_init__(self):
        self.dataset_dir = Path(self.dataset_dir)
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)
        if self.mode is not PipelineMode.BASELINE and self.psf_dims is None:
            raise ConfigurationError(f"mode {self.mode.value} requires psf_dims")
        if self.threshold <= 0:
            raise ConfigurationError(f"threshold must be positive, got {self.threshold}")
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if self.parallelism < 1:
            raise ConfigurationError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.failure_budget < 0:
            raise ConfigurationError(f"failure budget must be >= 0, got {self.failure_budget}")


@dataclass(frozen=True)
class PerImageResult:
    image_id: str
    measure: float
    label: FocusLabel
    psf: str | None
    scores: EvalScores
    detector_error: str | None = None


@dataclass
class RunReport:
    per_image: list[PerImageResult]
    aggregate: EvalScores
    manifest: dict

    @property
    def failures(self) -> list[dict]:
        return self.manifest.get("failures", [])


def discover_dataset(dataset_dir: Path) -> tuple[list[tuple[str, Path, Path]], list[str]]:
    """Pair image files with their gt_<id>.txt; unmatched files become warnings."""
    dataset_dir = Path(dataset_dir)
    if not dataset_dir.is_dir():
        raise DataError(f"dataset directory {dataset_dir} does not exist")
    warnings = []
    pairs = []
    images = sorted(
        p for p in dataset_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    claimed_gt = set()
    for image_path in images:
        gt_path = dataset_dir / f"gt_{image_path.stem}.txt"
        if not gt_path.is_file():
            warnings.append(f"no ground truth for {image_path.name}, skipped")
            continue
        claimed_gt.add(gt_path.name)
        pairs.append((image_path.stem, image_path, gt_path))
    for gt_path in sorted(dataset_dir.glob("gt_*.txt")):
        if gt_path.name not in claimed_gt:
            warnings.append(f"no image for {gt_path.name}, skipped")
    if not pairs:
        raise DataError(f"dataset directory {dataset_dir} has no matched image/gt pairs")
    return pairs, warnings


def _describe_detector(source: DetectorSource) -> dict:
    if isinstance(source, PrecomputedSource):
        return {"kind": "precomputed", "directory": str(source.directory)}
    if isinstance(source, ExternalCommandSource):
        return {
            "kind": "command",
            "template": source.command_template,
            "timeout_s": source.timeout_s,
            "cache_dir": str(source.cache_dir) if source.cache_dir else None,
        }
    return {
        "kind": "mock",
        "drop_fraction": source.spec.drop_fraction,
        "jitter_px": source.spec.jitter_px,
        "seed": source.spec.seed,
    }


def _process_image(
    config: RunConfig, image_id: str, image_path: Path, gt: ImageAnnotations
) -> PerImageResult:
    img = load_grayscale(image_path)
    verdict = classify(img, config.threshold)
    deblur = config.mode is PipelineMode.DEBLUR_ALL or (
        config.mode is PipelineMode.DEBLUR_BLURRY_ONLY and verdict.label is FocusLabel.BLURRY
    )
    if deblur:
        x, y = config.psf_dims
        result = blind_deconvolve(img, init_psf(x, y), config.iterations)
        detector_input: Raster = result.restored
        psf_used = f"{x}x{y}"
        descriptor = f"deconv-{x}x{y}-iters{config.iterations}"
    else:
        detector_input = img
        psf_used = None
        descriptor = "none"
    detection = detect(config.detector, image_id, detector_input, descriptor)
    scores = score_image(gt, detection.annotations, config.match_mode)
    return PerImageResult(
        image_id=image_id,
        measure=verdict.measure,
        label=verdict.label,
        psf=psf_used,
        scores=scores,
        detector_error=detection.error,
    )


def _hash_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(config: RunConfig) -> RunReport:
    """Execute the full pipeline over a dataset and persist the report."""
    pairs, warnings = discover_dataset(config.dataset_dir)
    gt_by_id = {
        image_id: parse_gt_icdar2013(gt_path.read_text(encoding="utf-8"), image_id)
        for image_id, _, gt_path in pairs
    }
    if isinstance(config.detector, MockSource) and config.detector.ground_truth is None:
        config.detector.ground_truth = gt_by_id

    def job(pair):
        image_id, image_path, _ = pair
        return _process_image(config, image_id, image_path, gt_by_id[image_id])

    if config.parallelism == 1:
        per_image = [job(pair) for pair in pairs]
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            per_image = list(pool.map(job, pairs))
    per_image.sort(key=lambda r: r.image_id)

    failures = [
        {"image_id": r.image_id, "error": r.detector_error}
        for r in per_image
        if r.detector_error is not None
    ]
    inputs = {}
    for _, image_path, gt_path in sorted(pairs, key=lambda p: p[0]):
        inputs[image_path.name] = _hash_file(image_path)
        inputs[gt_path.name] = _hash_file(gt_path)
    manifest = {
        "dataset_dir": str(config.dataset_dir),
        "detector": _describe_detector(config.detector),
        "detector_input": "grayscale-8bit-png",
        "mode": config.mode.value,
        "psf_dims": list(config.psf_dims) if config.psf_dims else None,
        "threshold": config.threshold,
        "iterations": config.iterations,
        "match_mode": config.match_mode.value,
        "inputs": inputs,
        "warnings": warnings,
        "failures": failures,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    report = RunReport(
        per_image=per_image,
        aggregate=aggregate([r.scores for r in per_image]),
        manifest=manifest,
    )
    if config.output_dir is not None:
        write_run_report(report, config.output_dir)
    return report


def report_to_json_dict(report: RunReport) -> dict:
    return {
        "manifest": report.manifest,
        "aggregate": report.aggregate.to_json_dict(),
        "per_image": [
            {
                "image_id": r.image_id,
                "measure": r.measure,
                "label": r.label.value,
                "psf": r.psf,
                "detector_error": r.detector_error,
                **r.scores.to_json_dict(),
            }
            for r in report.per_image
        ],
    }


def report_csv_text(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["image_id", "measure", "label", "psf", "precision", "recall", "hmean"])
    for r in report.per_image:
        writer.writerow(
            [
                r.image_id,
                repr(r.measure),
                r.label.value,
                r.psf if r.psf is not None else "none",
                repr(r.scores.precision),
                repr(r.scores.recall),
                repr(r.scores.hmean),
            ]
        )
    return buf.getvalue()


def write_run_report(report: RunReport, output_dir: Path) -> tuple[Path, Path]:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    json_path = output_dir / "report.json"
    csv_path = output_dir / "report.csv"
    json_path.write_text(
        json.dumps(report_to_json_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    csv_path.write_text(report_csv_text(report), encoding="utf-8")
    return json_path, csv_path


@dataclass(frozen=True)
class SweepRow:
    psf_dims: tuple[int, int]
    scores: EvalScores
    best: bool = False


def sweep(config: RunConfig, grid: list[tuple[int, int]]) -> list[SweepRow]:
    """Run the pipeline once per candidate PSF dims; rank rows by h-mean.

    The detector source (and with it any command cache) is shared across
    rows, so images the preprocessing leaves unchanged are detected once.
    """
    if not grid:
        raise ConfigurationError("sweep grid must be non-empty")
    if len(set(grid)) != len(grid):
        raise ConfigurationError("sweep grid has repeated dims")
    for dims in grid:
        if not (1 <= dims[0] <= 7 and 1 <= dims[1] <= 7):
            raise ConfigurationError(f"sweep dims must be within 1..7, got {dims}")
    if config.mode is PipelineMode.BASELINE:
        raise ConfigurationError("sweep requires a deblurring mode")
    results = []
    for dims in grid:
        run_config = RunConfig(
            dataset_dir=config.dataset_dir,
            detector=config.detector,
            mode=config.mode,
            psf_dims=dims,
            threshold=config.threshold,
            iterations=config.iterations,
            match_mode=config.match_mode,
            output_dir=None,
            parallelism=config.parallelism,
            failure_budget=config.failure_budget,
        )
        results.append((dims, run(run_config).aggregate))
    results.sort(key=lambda item: (-item[1].hmean, item[0]))
    return [
        SweepRow(psf_dims=dims, scores=scores, best=(idx == 0))
        for idx, (dims, scores) in enumerate(results)
    ]


def sweep_table_text(rows: list[SweepRow]) -> str:
    lines = ["psf,precision,recall,hmean,best"]
    for row in rows:
        lines.append(
            f"{row.psf_dims[0]}x{row.psf_dims[1]},"
            f"{row.scores.precision * 100:.2f}%,"
            f"{row.scores.recall * 100:.2f}%,"
            f"{row.scores.hmean * 100:.2f}%,"
            f"{'*' if row.best else ''}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RankingRow:
    name: str
    scores: EvalScores


def report_ranking(entries: list[tuple[str, EvalScores]]) -> list[RankingRow]:
    """Sort named aggregates by h-mean descending; ties stay in name order."""
    if not entries:
        raise ConfigurationError("ranking needs at least one entry")
    ordered = sorted(entries, key=lambda e: (-e[1].hmean, e[0]))
    return [RankingRow(name=name, scores=scores) for name, scores in ordered]


def ranking_table_text(rows: list[RankingRow]) -> str:
    width = max(len(r.name) for r in rows)
    lines = [f"{'method'.ljust(width)}  precision  recall   h-mean"]
    for r in rows:
        lines.append(
            f"{r.name.ljust(width)}  "
            f"{r.scores.precision * 100:8.2f}%  "
            f"{r.scores.recall * 100:5.2f}%  "
            f"{r.scores.hmean * 100:5.2f}%"
        )
    return "\n".join(lines) + "\n"
