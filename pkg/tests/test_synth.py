import json
from pathlib import Path

import pytest

from deblurtext.blur import focus_measure
from deblurtext.imageio import load_grayscale
from deblurtext.scoring import parse_gt_icdar2013
from deblurtext.synth import (
    box_kernel,
    calibrate_threshold,
    gaussian_kernel,
    generate_synthetic_corpus,
)


def corpus_bytes(root: Path) -> dict:
    return {
        str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()
    }


class TestKernels:
    def test_box_kernel_uniform(self):
        k = box_kernel(1, 3)
        assert k.data.tolist() == [[1 / 3, 1 / 3, 1 / 3]]

    def test_gaussian_kernel_normalized(self):
        k = gaussian_kernel(1.5)
        assert abs(k.data.sum() - 1.0) < 1e-12
        assert k.kh == k.kw == 2 * 5 + 1

    def test_gaussian_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            gaussian_kernel(0.0)


class TestCorpus:
    def test_deterministic_bytes(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_synthetic_corpus(6, seed=42, out=a)
        generate_synthetic_corpus(6, seed=42, out=b)
        assert corpus_bytes(a) == corpus_bytes(b)

    def test_different_seed_differs(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_synthetic_corpus(4, seed=1, out=a)
        generate_synthetic_corpus(4, seed=2, out=b)
        assert corpus_bytes(a) != corpus_bytes(b)

    def test_manifest_records_kernels_and_boxes(self, tmp_path):
        manifest = generate_synthetic_corpus(8, seed=7, out=tmp_path)
        assert manifest["count"] == 8
        entries = manifest["images"]
        assert len(entries) == 8
        sharp = [e for e in entries if not e["blurred"]]
        blurred = [e for e in entries if e["blurred"]]
        assert len(sharp) == 4 and len(blurred) == 4
        assert all(e["kernel"] is None for e in sharp)
        assert all(e["kernel"] is not None and e["original"] for e in blurred)
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk == manifest

    def test_gt_files_parse_and_match_manifest(self, tmp_path):
        manifest = generate_synthetic_corpus(4, seed=3, out=tmp_path)
        for entry in manifest["images"]:
            anns = parse_gt_icdar2013(
                (tmp_path / entry["gt"]).read_text(), entry["image_id"]
            )
            parsed = [[b.x_min, b.y_min, b.x_max, b.y_max] for b in anns.boxes]
            assert parsed == [[float(v) for v in box] for box in entry["boxes"]]
            assert not any(b.dont_care for b in anns.boxes)

    def test_blurred_half_is_measurably_blurrier(self, tmp_path):
        manifest = generate_synthetic_corpus(10, seed=11, out=tmp_path)
        for entry in manifest["images"]:
            if not entry["blurred"]:
                continue
            blurred = focus_measure(load_grayscale(tmp_path / entry["image"]))
            sharp = focus_measure(load_grayscale(tmp_path / entry["original"]))
            assert blurred < sharp

    def test_rejects_empty_corpus(self, tmp_path):
        with pytest.raises(ValueError):
            generate_synthetic_corpus(0, seed=1, out=tmp_path)


class TestCalibration:
    def test_separable_data_is_fully_split(self):
        measures = [5.0, 8.0, 12.0, 300.0, 450.0, 900.0]
        blurry = [True, True, True, False, False, False]
        thr, acc = calibrate_threshold(measures, blurry)
        assert acc == 1.0
        assert 12.0 < thr <= 300.0

    def test_threshold_respects_strict_greater_rule(self):
        thr, acc = calibrate_threshold([10.0, 20.0], [True, False])
        assert acc == 1.0
        assert (10.0 <= thr) and (thr < 20.0)

    def test_corpus_split(self, tmp_path):
        manifest = generate_synthetic_corpus(12, seed=5, out=tmp_path)
        measures = []
        blurry = []
        for entry in manifest["images"]:
            measures.append(focus_measure(load_grayscale(tmp_path / entry["image"])))
            blurry.append(entry["blurred"])
        _, acc = calibrate_threshold(measures, blurry)
        assert acc >= 0.9

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            calibrate_threshold([1.0], [True, False])
