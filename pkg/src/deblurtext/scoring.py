"""Ground-truth/detection parsing, box matching, and precision/recall scoring.

Two selectable match modes cover the two common readings of the protocol:

* BEST_MATCH: continuous Dice-style overlap, each box scored against its
  closest counterpart with 2*inter / (area_a + area_b), summed into the
  precision/recall numerators.
* IOU_AT_50: discrete greedy one-to-one matching; a pair counts when its
  intersection-over-union reaches 0.5.

Raw numerators and denominators ride along in EvalScores so dataset-level
scores are micro-aggregated (tallies summed, then divided) rather than
averaged per image.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum

from .errors import ParseError

log = logging.getLogger(__name__)

DONT_CARE_TOKEN = "###"
IOU_MATCH_THRESHOLD = 0.5


@dataclass(frozen=True)
class AnnotatedBox:
    """Axis-aligned rectangle; ground truth and detections share this shape."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    transcription: str | None = None
    dont_care: bool = False

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(
                f"degenerate box ({self.x_min},{self.y_min},{self.x_max},{self.y_max})"
            )

    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def translated(self, dx: float, dy: float) -> "AnnotatedBox":
        return AnnotatedBox(
            self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy,
            self.transcription, self.dont_care,
        )


@dataclass(frozen=True)
class ImageAnnotations:
    image_id: str
    boxes: tuple[AnnotatedBox, ...]

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("image_id must be non-empty")
        object.__setattr__(self, "boxes", tuple(self.boxes))


class MatchMode(Enum):
    BEST_MATCH = "bestmatch"
    IOU_AT_50 = "iou50"


@dataclass(frozen=True)
class EvalScores:
    """Precision/recall/h-mean plus the raw tallies that produced them."""

    precision: float
    recall: float
    hmean: float
    precision_num: float
    precision_den: float
    recall_num: float
    recall_den: float

    def to_json_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "hmean": self.hmean,
            "precision_num": self.precision_num,
            "precision_den": self.precision_den,
            "recall_num": self.recall_num,
            "recall_den": self.recall_den,
        }


_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _parse_coords(tokens: list[str], line_no: int) -> tuple[float, float, float, float]:
    if len(tokens) != 4:
        raise ParseError(f"expected 4 coordinates, got {len(tokens)}", line_no)
    values = []
    for tok in tokens:
        if not _NUMBER.match(tok):
            raise ParseError(f"bad coordinate {tok!r}", line_no)
        values.append(float(tok))
    x_min, y_min, x_max, y_max = values
    if x_min > x_max:
        raise ParseError(f"x_min {x_min} > x_max {x_max}", line_no)
    if y_min > y_max:
        raise ParseError(f"y_min {y_min} > y_max {y_max}", line_no)
    return x_min, y_min, x_max, y_max


def parse_gt_icdar2013(text: str, image_id: str = "unnamed") -> ImageAnnotations:
    """Parse ICDAR 2013 ground truth: `x_min, y_min, x_max, y_max, "transcription"`.

    Comma- and space-separated variants are both accepted; a transcription
    of "###" marks the box as don't-care.
    """
    boxes = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.lstrip("﻿").strip()
        if not line:
            continue
        transcription = None
        head = line
        first_quote = line.find('"')
        if first_quote != -1:
            last_quote = line.rfind('"')
            if last_quote == first_quote:
                raise ParseError("unterminated transcription quote", line_no)
            transcription = line[first_quote + 1 : last_quote]
            head = line[:first_quote]
        tokens = [t for t in re.split(r"[,\s]+", head.strip()) if t]
        if transcription is None and len(tokens) > 4:
            transcription = " ".join(tokens[4:])
            tokens = tokens[:4]
        coords = _parse_coords(tokens, line_no)
        boxes.append(
            AnnotatedBox(
                *coords,
                transcription=transcription,
                dont_care=transcription == DONT_CARE_TOKEN,
            )
        )
    return ImageAnnotations(image_id=image_id, boxes=tuple(boxes))


def parse_detections(text: str, image_id: str = "unnamed") -> ImageAnnotations:
    """Parse detector output: `x_min,y_min,x_max,y_max[,confidence]` per line.

    Confidence must be numeric when present but is not used by scoring.
    """
    boxes = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.lstrip("﻿").strip()
        if not line:
            continue
        tokens = [t for t in re.split(r"[,\s]+", line) if t]
        if len(tokens) == 5:
            if not _NUMBER.match(tokens[4]):
                raise ParseError(f"bad confidence {tokens[4]!r}", line_no)
            tokens = tokens[:4]
        coords = _parse_coords(tokens, line_no)
        boxes.append(AnnotatedBox(*coords))
    return ImageAnnotations(image_id=image_id, boxes=tuple(boxes))


def intersection_area(a: AnnotatedBox, b: AnnotatedBox) -> float:
    overlap_w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    overlap_h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    return max(0.0, overlap_w) * max(0.0, overlap_h)


def iou(a: AnnotatedBox, b: AnnotatedBox) -> float:
    inter = intersection_area(a, b)
    union = a.area() + b.area() - inter
    return inter / union if union > 0 else 0.0


def _dice_overlap(a: AnnotatedBox, b: AnnotatedBox) -> float:
    denom = a.area() + b.area()
    return 2.0 * intersection_area(a, b) / denom if denom > 0 else 0.0


def best_match_g(gi: AnnotatedBox, detections: list[AnnotatedBox]) -> float:
    """Closest-match score of one ground-truth box over all detections."""
    if gi.area() == 0:
        log.warning("zero-area ground-truth box %s contributes 0", gi)
    return max((_dice_overlap(gi, dj) for dj in detections), default=0.0)


def best_match_d(dj: AnnotatedBox, ground_truth: list[AnnotatedBox]) -> float:
    """Closest-match score of one detection over all ground-truth boxes."""
    if dj.area() == 0:
        log.warning("zero-area detection box %s contributes 0", dj)
    return max((_dice_overlap(dj, gi) for gi in ground_truth), default=0.0)


def hmean(p: float, r: float) -> float:
    """Harmonic mean 2pr/(p+r); 0 when both inputs are 0."""
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def scores_from_tallies(
    precision_num: float, precision_den: float, recall_num: float, recall_den: float
) -> EvalScores:
    """Turn raw tallies into scores, with the empty-set conventions applied.

    No detections and no ground truth counts as perfect (1.0 across the
    board); an empty side against a non-empty one scores 0 for its ratio.
    """
    if precision_den > 0:
        precision = precision_num / precision_den
    else:
        precision = 1.0 if recall_den == 0 else 0.0
    if recall_den > 0:
        recall = recall_num / recall_den
    else:
        recall = 1.0 if precision_den == 0 else 0.0
    return EvalScores(
        precision=precision,
        recall=recall,
        hmean=hmean(precision, recall),
        precision_num=precision_num,
        precision_den=precision_den,
        recall_num=recall_num,
        recall_den=recall_den,
    )


def _greedy_iou_matches(
    g_boxes: list[AnnotatedBox], d_boxes: list[AnnotatedBox]
) -> list[tuple[int, int]]:
    """One-to-one greedy matching in descending IoU; ties by lowest index pair."""
    candidates = []
    for gi_idx, gi in enumerate(g_boxes):
        for dj_idx, dj in enumerate(d_boxes):
            overlap = iou(gi, dj)
            if overlap >= IOU_MATCH_THRESHOLD:
                candidates.append((-overlap, gi_idx, dj_idx))
    candidates.sort()
    matched_g: set[int] = set()
    matched_d: set[int] = set()
    matches = []
    for _, gi_idx, dj_idx in candidates:
        if gi_idx in matched_g or dj_idx in matched_d:
            continue
        matched_g.add(gi_idx)
        matched_d.add(dj_idx)
        matches.append((gi_idx, dj_idx))
    assert len(matched_g) == len(matches) and len(matched_d) == len(matches)
    return matches


def score_image(
    gt: ImageAnnotations, det: ImageAnnotations, mode: MatchMode = MatchMode.IOU_AT_50
) -> EvalScores:
    """Score one image's detections against its ground truth.

    Don't-care ground-truth boxes are dropped, and any detection covering a
    don't-care box at IoU >= 0.5 is neither rewarded nor penalized.
    """
    g_boxes = [b for b in gt.boxes if not b.dont_care]
    ignored = [b for b in gt.boxes if b.dont_care]
    d_boxes = [
        b
        for b in det.boxes
        if not any(iou(b, dc) >= IOU_MATCH_THRESHOLD for dc in ignored)
    ]
    if mode is MatchMode.BEST_MATCH:
        precision_num = math.fsum(best_match_d(dj, g_boxes) for dj in d_boxes)
        recall_num = math.fsum(best_match_g(gi, d_boxes) for gi in g_boxes)
    else:
        matched = len(_greedy_iou_matches(g_boxes, d_boxes))
        precision_num = recall_num = float(matched)
    return scores_from_tallies(
        precision_num, float(len(d_boxes)), recall_num, float(len(g_boxes))
    )


def aggregate(per_image: list[EvalScores]) -> EvalScores:
    """Micro-aggregate: sum every numerator and denominator, then recompute."""
    if not per_image:
        raise ValueError("cannot aggregate an empty score list")
    return scores_from_tallies(
        math.fsum(s.precision_num for s in per_image),
        math.fsum(s.precision_den for s in per_image),
        math.fsum(s.recall_num for s in per_image),
        math.fsum(s.recall_den for s in per_image),
    )
