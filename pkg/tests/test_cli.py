import json

import pytest

from deblurtext.cli import load_config_file, main, parse_grid, parse_psf_dims
from deblurtext.errors import ConfigurationError
from deblurtext.synth import generate_synthetic_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_corpus")
    manifest = generate_synthetic_corpus(6, seed=888, out=root)
    return root, manifest


class TestHelpers:
    def test_parse_psf_dims(self):
        assert parse_psf_dims("1x3") == (1, 3)
        assert parse_psf_dims("3X2") == (3, 2)
        with pytest.raises(ConfigurationError):
            parse_psf_dims("13")

    def test_parse_grid_square(self):
        assert parse_grid("2") == [(1, 1), (1, 2), (2, 1), (2, 2)]

    def test_parse_grid_list(self):
        assert parse_grid("1x1,1x2") == [(1, 1), (1, 2)]

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\ndataset_dir = /data  # trailing\nthreshold=55\n\n")
        assert load_config_file(cfg) == {"dataset_dir": "/data", "threshold": "55"}

    def test_config_file_bad_line(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just words\n")
        with pytest.raises(ConfigurationError):
            load_config_file(cfg)


class TestClassify:
    def test_emits_csv_rows(self, corpus, capsys):
        root, manifest = corpus
        images = [str(root / e["image"]) for e in manifest["images"][:3]]
        assert main(["classify", "--threshold", "100", *images]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3
        for line, entry in zip(lines, manifest["images"]):
            name, measure, label = line.split(",")
            assert name == entry["image"]
            assert float(measure) > 0
            assert label in ("blurry", "non-blurry")

    def test_bad_threshold_is_config_error(self, corpus):
        root, manifest = corpus
        image = str(root / manifest["images"][0]["image"])
        assert main(["classify", "--threshold", "0", image]) == 1

    def test_missing_image_is_data_error(self, tmp_path):
        assert main(["classify", str(tmp_path / "none.png")]) == 2


class TestDeblur:
    def test_writes_restored_png_and_psf_sidecar(self, corpus, tmp_path, capsys):
        root, manifest = corpus
        blurred = next(e for e in manifest["images"] if e["blurred"])
        out = tmp_path / "restored"
        code = main(
            ["deblur", "--psf", "1x3", "--iters", "3", "--out", str(out), str(root / blurred["image"])]
        )
        assert code == 0
        stem = blurred["image_id"]
        assert (out / f"{stem}.png").is_file()
        sidecar = json.loads((out / f"{stem}_psf.json").read_text())
        assert set(sidecar) == {"kw", "kh", "weights"}
        assert sidecar["kh"] == 1 and sidecar["kw"] == 3
        assert len(sidecar["weights"]) == 3
        assert abs(sum(sidecar["weights"]) - 1.0) < 1e-9


class TestEvaluate:
    def test_scores_detection_dir(self, corpus, tmp_path, capsys):
        root, manifest = corpus
        det_dir = tmp_path / "dets"
        det_dir.mkdir()
        for entry in manifest["images"]:
            lines = [f"{b[0]},{b[1]},{b[2]},{b[3]}" for b in entry["boxes"]]
            (det_dir / f"res_{entry['image_id']}.txt").write_text("\n".join(lines) + "\n")
        code = main(["evaluate", "--gt-dir", str(root), "--det-dir", str(det_dir)])
        assert code == 0
        out = capsys.readouterr().out
        header, *rows, agg_line = out.strip().splitlines()
        assert header == "image_id,measure,label,precision,recall,hmean"
        assert len(rows) == len(manifest["images"])
        agg = json.loads(agg_line)
        assert agg["precision"] == 1.0 and agg["recall"] == 1.0

    def test_missing_detection_file_scores_zero(self, corpus, tmp_path, capsys):
        root, _ = corpus
        det_dir = tmp_path / "empty_dets"
        det_dir.mkdir()
        assert main(["evaluate", "--gt-dir", str(root), "--det-dir", str(det_dir)]) == 0
        agg = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert agg["precision"] == 0.0 and agg["recall"] == 0.0

    def test_no_gt_files_is_data_error(self, tmp_path):
        assert main(["evaluate", "--gt-dir", str(tmp_path), "--det-dir", str(tmp_path)]) == 2


class TestRun:
    def test_config_file_with_overrides(self, corpus, tmp_path, capsys):
        root, _ = corpus
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"dataset_dir = {root}\ndetector = mock\nmode = baseline\n")
        out_dir = tmp_path / "out"
        code = main(["run", "--config", str(cfg), "--out", str(out_dir)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "precision 100.00%" in stdout
        assert (out_dir / "report.json").is_file()
        assert (out_dir / "report.csv").is_file()

    def test_missing_dataset_dir_is_config_error(self):
        assert main(["run", "--detector", "mock"]) == 1

    def test_unknown_mode_is_config_error(self, corpus):
        root, _ = corpus
        assert main(["run", "--dataset-dir", str(root), "--mode", "nonsense"]) == 1

    def test_failures_beyond_budget_exit_3(self, corpus, tmp_path, capsys):
        root, _ = corpus
        det_dir = tmp_path / "missing_dets"
        det_dir.mkdir()
        code = main(
            [
                "run",
                "--dataset-dir", str(root),
                "--detector", "precomputed",
                "--detector-dir", str(det_dir),
            ]
        )
        assert code == 3

    def test_failure_budget_absorbs(self, corpus, tmp_path):
        root, manifest = corpus
        det_dir = tmp_path / "missing_dets"
        det_dir.mkdir()
        code = main(
            [
                "run",
                "--dataset-dir", str(root),
                "--detector", "precomputed",
                "--detector-dir", str(det_dir),
                "--failure-budget", str(len(manifest["images"])),
            ]
        )
        assert code == 0


class TestSweep:
    def test_sweep_table(self, corpus, tmp_path, capsys):
        root, _ = corpus
        out_dir = tmp_path / "sweep_out"
        code = main(
            [
                "sweep",
                "--dataset-dir", str(root),
                "--detector", "mock",
                "--grid", "2",
                "--iterations", "2",
                "--out", str(out_dir),
            ]
        )
        assert code == 0
        table = (out_dir / "sweep.csv").read_text().splitlines()
        assert table[0] == "psf,precision,recall,hmean,best"
        assert len(table) == 5


class TestSynthAndReport:
    def test_synth_writes_corpus(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        assert main(["synth", "--count", "2", "--seed", "9", "--out", str(out)]) == 0
        assert (out / "manifest.json").is_file()

    def test_report_ranks_entries(self, capsys):
        code = main(
            [
                "report",
                "--entry", "improved:95.24:93.72",
                "--entry", "reference:91.87:95.45",
                "--entry", "stock:89.04:93.93",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert [line.split()[0] for line in out[1:]] == ["improved", "reference", "stock"]
        assert "94.47%" in out[1]

    def test_report_from_run_json(self, corpus, tmp_path, capsys):
        root, _ = corpus
        out_dir = tmp_path / "ranked_run"
        main(["run", "--dataset-dir", str(root), "--detector", "mock", "--out", str(out_dir)])
        capsys.readouterr()
        code = main(["report", f"mockrun={out_dir / 'report.json'}"])
        assert code == 0
        assert "mockrun" in capsys.readouterr().out

    def test_report_bad_entry_is_config_error(self):
        assert main(["report", "--entry", "oops"]) == 1
