"""Command-line interface.

Subcommands: classify, deblur, evaluate, run, sweep, synth, report.
`run` and `sweep` read a flat key=value config file; every key can be
overridden by a flag. Exit codes: 0 success, 1 configuration error,
2 data error, 3 detector failures beyond the budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .blur import DEFAULT_THRESHOLD, classify
from .deconv import DEFAULT_ITERATIONS, blind_deconvolve, init_psf
from .detector import ExternalCommandSource, MockSource, PerturbationSpec, PrecomputedSource
from .errors import ConfigurationError, DataError
from .imageio import load_grayscale, save_grayscale_png
from .pipeline import (
    PipelineMode,
    RunConfig,
    ranking_table_text,
    report_ranking,
    run,
    sweep,
    sweep_table_text,
    write_run_report,
)
from .scoring import (
    EvalScores,
    MatchMode,
    aggregate,
    hmean,
    parse_detections,
    parse_gt_icdar2013,
    score_image,
    scores_from_tallies,
)
from .synth import generate_synthetic_corpus

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_DETECTOR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def parse_psf_dims(text: str) -> tuple[int, int]:
    try:
        x, y = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ConfigurationError(f"PSF dims must look like 1x3, got {text!r}") from None
    return x, y


def parse_grid(text: str) -> list[tuple[int, int]]:
    text = text.strip()
    if "x" not in text:
        try:
            n = int(text)
        except ValueError:
            raise ConfigurationError(f"bad grid spec {text!r}") from None
        return [(x, y) for x in range(1, n + 1) for y in range(1, n + 1)]
    return [parse_psf_dims(t) for t in text.split(",") if t.strip()]


def load_config_file(path: str | Path) -> dict[str, str]:
    """Flat `key = value` lines; '#' starts a comment."""
    values = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{line_no}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


_MODES = {m.value: m for m in PipelineMode}
_MATCH_MODES = {m.value: m for m in MatchMode}


def _build_detector(settings: dict):
    kind = settings.get("detector", "mock")
    if kind == "mock":
        return MockSource(
            PerturbationSpec(
                drop_fraction=float(settings.get("mock_drop", 0.0)),
                jitter_px=float(settings.get("mock_jitter", 0.0)),
                seed=int(settings.get("mock_seed", 0)),
            )
        )
    if kind == "precomputed":
        directory = settings.get("detector_dir")
        if not directory:
            raise ConfigurationError("precomputed detector requires detector_dir")
        return PrecomputedSource(Path(directory))
    if kind == "command":
        template = settings.get("detector_command")
        if not template:
            raise ConfigurationError("command detector requires detector_command")
        cache_dir = settings.get("cache_dir")
        return ExternalCommandSource(
            template,
            timeout_s=float(settings.get("detector_timeout", 120.0)),
            cache_dir=Path(cache_dir) if cache_dir else None,
        )
    raise ConfigurationError(f"unknown detector kind {kind!r}")


def _merged_settings(args) -> dict:
    settings = {}
    if args.config:
        settings.update(load_config_file(args.config))
    overrides = {
        "dataset_dir": args.dataset_dir,
        "detector": args.detector,
        "detector_dir": args.detector_dir,
        "detector_command": args.detector_command,
        "cache_dir": args.cache_dir,
        "mode": args.mode,
        "psf": args.psf,
        "threshold": args.threshold,
        "iterations": args.iterations,
        "match_mode": args.match_mode,
        "output_dir": args.out,
        "parallelism": args.parallelism,
        "failure_budget": args.failure_budget,
        "mock_drop": args.mock_drop,
        "mock_jitter": args.mock_jitter,
        "mock_seed": args.mock_seed,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    return settings


def _run_config(settings: dict, default_mode: str = "baseline") -> RunConfig:
    dataset_dir = settings.get("dataset_dir")
    if not dataset_dir:
        raise ConfigurationError("dataset_dir is required")
    mode_name = str(settings.get("mode", default_mode))
    if mode_name not in _MODES:
        raise ConfigurationError(f"unknown mode {mode_name!r}")
    match_name = str(settings.get("match_mode", MatchMode.IOU_AT_50.value))
    if match_name not in _MATCH_MODES:
        raise ConfigurationError(f"unknown match mode {match_name!r}")
    psf = settings.get("psf")
    output_dir = settings.get("output_dir")
    return RunConfig(
        dataset_dir=Path(dataset_dir),
        detector=_build_detector(settings),
        mode=_MODES[mode_name],
        psf_dims=parse_psf_dims(str(psf)) if psf else None,
        threshold=float(settings.get("threshold", DEFAULT_THRESHOLD)),
        iterations=int(settings.get("iterations", DEFAULT_ITERATIONS)),
        match_mode=_MATCH_MODES[match_name],
        output_dir=Path(output_dir) if output_dir else None,
        parallelism=int(settings.get("parallelism", os.cpu_count() or 1)),
        failure_budget=int(settings.get("failure_budget", 0)),
    )


def _cmd_classify(args) -> int:
    for path in args.images:
        verdict = classify(load_grayscale(path), threshold=args.threshold)
        print(f"{Path(path).name},{verdict.measure!r},{verdict.label.value}")
    return EXIT_OK


def _cmd_deblur(args) -> int:
    x, y = parse_psf_dims(args.psf)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in args.images:
        img = load_grayscale(path)
        result = blind_deconvolve(img, init_psf(x, y), iterations=args.iters)
        stem = Path(path).stem
        save_grayscale_png(result.restored, out_dir / f"{stem}.png")
        (out_dir / f"{stem}_psf.json").write_text(
            json.dumps(result.psf_estimate.to_json_dict()) + "\n", encoding="utf-8"
        )
        print(f"{Path(path).name} -> {out_dir / (stem + '.png')}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    gt_dir = Path(args.gt_dir)
    det_dir = Path(args.det_dir)
    gt_files = sorted(gt_dir.glob("gt_*.txt"))
    if not gt_files:
        raise DataError(f"no gt_*.txt files in {gt_dir}")
    mode = _MATCH_MODES[args.match_mode]
    rows = []
    scores = []
    for gt_path in gt_files:
        image_id = gt_path.stem[len("gt_") :]
        gt = parse_gt_icdar2013(gt_path.read_text(encoding="utf-8"), image_id)
        det_path = det_dir / f"res_{image_id}.txt"
        if det_path.is_file():
            det = parse_detections(det_path.read_text(encoding="utf-8"), image_id)
        else:
            det = parse_detections("", image_id)
        s = score_image(gt, det, mode)
        scores.append(s)
        rows.append(f"{image_id},,,{s.precision!r},{s.recall!r},{s.hmean!r}")
    csv_text = "image_id,measure,label,precision,recall,hmean\n" + "\n".join(rows) + "\n"
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
    else:
        print(csv_text, end="")
    agg = aggregate(scores)
    print(json.dumps({"images": len(scores), **agg.to_json_dict()}, sort_keys=True))
    return EXIT_OK


def _print_aggregate(report) -> None:
    agg = report.aggregate
    print(
        f"precision {agg.precision * 100:.2f}%  recall {agg.recall * 100:.2f}%  "
        f"h-mean {agg.hmean * 100:.2f}%  "
        f"({len(report.per_image)} images, {len(report.failures)} detector failures)"
    )


def _cmd_run(args) -> int:
    settings = _merged_settings(args)
    config = _run_config(settings)
    report = run(config)
    _print_aggregate(report)
    if config.output_dir is not None:
        print(f"report written to {config.output_dir}")
    if len(report.failures) > config.failure_budget:
        print(
            f"detector failures ({len(report.failures)}) exceed budget "
            f"({config.failure_budget})",
            file=sys.stderr,
        )
        return EXIT_DETECTOR
    return EXIT_OK


def _cmd_sweep(args) -> int:
    settings = _merged_settings(args)
    # per-row dims come from the grid; the seed value only satisfies validation
    settings.setdefault("psf", "1x1")
    config = _run_config(settings, default_mode=PipelineMode.DEBLUR_BLURRY_ONLY.value)
    grid = parse_grid(args.grid)
    rows = sweep(config, grid)
    text = sweep_table_text(rows)
    print(text, end="")
    if config.output_dir is not None:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        (config.output_dir / "sweep.csv").write_text(text, encoding="utf-8")
        print(f"sweep table written to {config.output_dir / 'sweep.csv'}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    manifest = generate_synthetic_corpus(args.count, seed=args.seed, out=args.out)
    print(f"{manifest['count']} images written to {args.out}")
    return EXIT_OK


def _scores_from_pr(p: float, r: float) -> EvalScores:
    return EvalScores(
        precision=p, recall=r, hmean=hmean(p, r),
        precision_num=p, precision_den=1.0, recall_num=r, recall_den=1.0,
    )


def _cmd_report(args) -> int:
    entries = []
    for item in args.reports:
        name, _, path = item.rpartition("=")
        path = Path(path)
        if not name:
            name = path.stem
        data = json.loads(path.read_text(encoding="utf-8"))
        agg = data["aggregate"]
        entries.append(
            (
                name,
                scores_from_tallies(
                    agg["precision_num"], agg["precision_den"],
                    agg["recall_num"], agg["recall_den"],
                ),
            )
        )
    for entry in args.entry or []:
        try:
            name, p, r = entry.split(":")
            entries.append((name, _scores_from_pr(float(p) / 100.0, float(r) / 100.0)))
        except ValueError:
            raise ConfigurationError(
                f"--entry must look like NAME:PRECISION:RECALL, got {entry!r}"
            ) from None
    rows = report_ranking(entries)
    print(ranking_table_text(rows), end="")
    return EXIT_OK


def _add_run_flags(sub) -> None:
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--dataset-dir", dest="dataset_dir")
    sub.add_argument("--detector", choices=["mock", "precomputed", "command"])
    sub.add_argument("--detector-dir", dest="detector_dir")
    sub.add_argument("--detector-command", dest="detector_command")
    sub.add_argument("--cache-dir", dest="cache_dir")
    sub.add_argument("--mode", choices=sorted(_MODES))
    sub.add_argument("--psf", help="PSF dims, e.g. 1x3")
    sub.add_argument("--threshold", type=float)
    sub.add_argument("--iterations", type=int)
    sub.add_argument("--match-mode", dest="match_mode", choices=sorted(_MATCH_MODES))
    sub.add_argument("--out", help="output directory for reports")
    sub.add_argument("--parallelism", type=int)
    sub.add_argument("--failure-budget", dest="failure_budget", type=int)
    sub.add_argument("--mock-drop", dest="mock_drop", type=float)
    sub.add_argument("--mock-jitter", dest="mock_jitter", type=float)
    sub.add_argument("--mock-seed", dest="mock_seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deblurtext", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("classify", help="focus-measure images as blurry/non-blurry")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("images", nargs="+")
    p.set_defaults(func=_cmd_classify)

    p = subs.add_parser("deblur", help="blind-deconvolve images")
    p.add_argument("--psf", default="1x3", help="PSF dims, e.g. 1x3")
    p.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--out", required=True)
    p.add_argument("images", nargs="+")
    p.set_defaults(func=_cmd_deblur)

    p = subs.add_parser("evaluate", help="score detection files against ground truth")
    p.add_argument("--gt-dir", dest="gt_dir", required=True)
    p.add_argument("--det-dir", dest="det_dir", required=True)
    p.add_argument(
        "--match-mode", dest="match_mode", choices=sorted(_MATCH_MODES),
        default=MatchMode.IOU_AT_50.value,
    )
    p.add_argument("--csv", help="write the per-image CSV here instead of stdout")
    p.set_defaults(func=_cmd_evaluate)

    p = subs.add_parser("run", help="classify, optionally deblur, detect, score")
    _add_run_flags(p)
    p.set_defaults(func=_cmd_run)

    p = subs.add_parser("sweep", help="run once per candidate PSF dims")
    _add_run_flags(p)
    p.add_argument("--grid", default="3", help="N for {1..N}^2 or list like 1x1,1x2")
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = subs.add_parser("report", help="rank named aggregates by h-mean")
    p.add_argument("reports", nargs="*", help="report.json paths, optionally NAME=path")
    p.add_argument("--entry", action="append", help="manual row NAME:PRECISION:RECALL")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
