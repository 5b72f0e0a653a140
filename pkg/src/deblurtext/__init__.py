"""Blur-aware preprocessing and evaluation toolkit for scene-text detection.

Classifies images as blurry/non-blurry by variance of the Laplacian,
restores blurry ones by blind Richardson-Lucy deconvolution over candidate
PSF dimensions, delegates text detection to a pluggable external detector,
and scores detections with precision / recall / h-mean.
"""

from .blur import FocusLabel, FocusVerdict, classify, focus_measure, laplacian_response
from .deconv import DeconvResult, Psf, blind_deconvolve, enforce_psf_constraints, init_psf
from .detector import (
    DetectorResult,
    ExternalCommandSource,
    MockSource,
    PerturbationSpec,
    PrecomputedSource,
    detect,
)
from .pipeline import PipelineMode, RunConfig, RunReport, report_ranking, run, sweep
from .raster import BorderPolicy, Kernel, Raster, convolve2d, correlate2d, to_grayscale
from .scoring import (
    AnnotatedBox,
    EvalScores,
    ImageAnnotations,
    MatchMode,
    aggregate,
    best_match_d,
    best_match_g,
    hmean,
    intersection_area,
    iou,
    parse_detections,
    parse_gt_icdar2013,
    score_image,
)
from .synth import calibrate_threshold, generate_synthetic_corpus

__version__ = "0.1.0"

__all__ = [
    "AnnotatedBox",
    "BorderPolicy",
    "DeconvResult",
    "DetectorResult",
    "EvalScores",
    "ExternalCommandSource",
    "FocusLabel",
    "FocusVerdict",
    "ImageAnnotations",
    "Kernel",
    "MatchMode",
    "MockSource",
    "PerturbationSpec",
    "PipelineMode",
    "PrecomputedSource",
    "Psf",
    "Raster",
    "RunConfig",
    "RunReport",
    "aggregate",
    "best_match_d",
    "best_match_g",
    "blind_deconvolve",
    "calibrate_threshold",
    "classify",
    "convolve2d",
    "correlate2d",
    "detect",
    "enforce_psf_constraints",
    "focus_measure",
    "generate_synthetic_corpus",
    "hmean",
    "init_psf",
    "intersection_area",
    "iou",
    "laplacian_response",
    "parse_detections",
    "parse_gt_icdar2013",
    "report_ranking",
    "run",
    "score_image",
    "sweep",
    "to_grayscale",
]
