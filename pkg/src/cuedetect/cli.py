"""Command-line entry point: ``detect``, ``eval`` and ``run-cdnet``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import evaluation, plotting
from .config import ConfigError, PipelineConfig, dump_config, load_config
from .evaluation import Confusion, MetricsReport
from .pipeline import STAGES, run
from .video_io import (
    SequenceError,
    list_frames,
    list_groundtruth,
    load_groundtruth,
    load_sequence,
    mask_filename,
    read_mask,
    read_temporal_roi,
    write_mask,
)

log = logging.getLogger("cuedetect")


class CLIError(Exception):
    """A user-facing failure; the message is printed and the exit code is 1."""


# ----------------------------------------------------------------- helpers

def _config(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        config = config.with_overrides(seed=args.seed)
    return config


def _parse_roi(text: str) -> tuple[int, int]:
    """``FIRST:LAST`` (1-based, inclusive) or a path to a ``temporalROI.txt`` file."""
    if Path(text).is_file():
        return read_temporal_roi(text)
    try:
        first, last = (int(part) for part in text.split(":"))
    except ValueError:
        raise CLIError(f"--roi expects FIRST:LAST or a temporalROI.txt path, got {text!r}") from None
    if first < 1 or last < first:
        raise CLIError(f"invalid --roi {text!r}")
    return first, last


def _find_roi(gt_dir: Path) -> tuple[int, int] | None:
    for candidate in (gt_dir / "temporalROI.txt", gt_dir.parent / "temporalROI.txt"):
        if candidate.is_file():
            return read_temporal_roi(candidate)
    return None


def _roi_text(roi) -> str:
    return "all frames" if roi is None else f"frames {roi[0]}-{roi[1]}"


def _f_measure(mask, gt) -> float:
    return evaluation.report(evaluation.accumulate(mask, gt)).fmeasure


@dataclass
class VideoEvaluation:
    confusion: Confusion
    frames: list[int]
    fmeasure: list[float]

    @property
    def report(self) -> MetricsReport:
        return evaluation.report(self.confusion)


def evaluate_directory(mask_dir: Path, gt_dir: Path, roi: tuple[int, int] | None) -> VideoEvaluation:
    """Pool the confusion of every ground-truth frame inside ``roi``.

    Every such frame needs a mask. Without an ROI the mask and ground-truth
    frame sets must coincide exactly.
    """
    masks = dict(list_frames(mask_dir))
    gts = dict(list_groundtruth(gt_dir))
    if not gts:
        raise CLIError(f"no ground-truth frames in {gt_dir}")
    wanted = sorted(n for n in gts if roi is None or roi[0] <= n <= roi[1])
    if not wanted:
        raise CLIError(f"no ground-truth frames inside {_roi_text(roi)} in {gt_dir}")
    missing = [n for n in wanted if n not in masks]
    extra = [] if roi is not None else sorted(set(masks) - set(gts))
    if missing or extra:
        detail = f"first missing mask {mask_filename(missing[0])}" if missing else \
            f"first mask without ground truth: frame {extra[0]}"
        raise CLIError(
            f"mask/ground-truth count mismatch over {_roi_text(roi)}: "
            f"{len(wanted)} ground-truth frames, {len(wanted) - len(missing)} matching masks "
            f"({len(masks)} masks in {mask_dir}); {detail}"
        )
    total = Confusion()
    curve = []
    for n in wanted:
        gt = load_groundtruth(gts[n])
        mask = read_mask(masks[n])
        if mask.shape != gt.shape:
            raise CLIError(f"frame {n}: mask is {mask.shape[1]}x{mask.shape[0]}, "
                           f"ground truth is {gt.shape[1]}x{gt.shape[0]}")
        conf = evaluation.accumulate(mask, gt)
        total = total + conf
        curve.append(evaluation.report(conf).fmeasure)
    return VideoEvaluation(total, wanted, curve)


def _write_report(rows, out_dir: Path, stem: str) -> None:
    evaluation.write_csv(rows, out_dir / f"{stem}.csv")
    (out_dir / f"{stem}.txt").write_text(evaluation.format_table(rows))
    plotting.metric_bars(rows, out_dir / f"{stem}.png")


def _detect_video(input_dir: Path, out_dir: Path, config: PipelineConfig, diagnostics: bool,
                  ablation: bool = False, gt_dir: Path | None = None, roi=None):
    """Run the detector over one frame directory and write its masks.

    Returns the per-frame records and, with ``ablation``, the pooled confusion
    of every labeling stage over the ground-truth frames in ``roi``.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    gts = dict(list_groundtruth(gt_dir)) if ablation and gt_dir is not None else {}
    stage_conf = {name: Confusion() for name in STAGES}
    records = []
    diag = open(out_dir / "diagnostics.jsonl", "w") if diagnostics else None
    try:
        for result in run(load_sequence(input_dir), config, ablation=ablation):
            write_mask(result.mask, out_dir / mask_filename(result.index))
            records.append(result.record)
            if diag is not None:
                diag.write(json.dumps(result.record) + "\n")
            n = result.index
            if n in gts and (roi is None or roi[0] <= n <= roi[1]):
                gt = load_groundtruth(gts[n])
                for name in STAGES:
                    # warm-up frames have no intermediate stages; they count with the final mask
                    stage_conf[name].accumulate(result.stages.get(name, result.mask), gt)
            if result.reinitialized:
                log.info("%s: reinitialized at frame %d", input_dir.name, n)
    finally:
        if diag is not None:
            diag.close()
    if diagnostics and records:
        plotting.stage_timings(records, out_dir / "timings.png")
    return records, stage_conf


# ----------------------------------------------------------------- commands

def cmd_detect(args) -> int:
    config = _config(args)
    out = Path(args.output)
    started = time.perf_counter()
    records, _ = _detect_video(Path(args.input), out, config, args.dump_diagnostics)
    (out / "config_used.txt").write_text(dump_config(config))
    log.info("detect: %d frames in %.1f s", len(records), time.perf_counter() - started)
    if args.gt:
        gt_dir = Path(args.gt)
        roi = _parse_roi(args.roi) if args.roi else _find_roi(gt_dir)
        ev = evaluate_directory(out, gt_dir, roi)
        _write_report([(Path(args.input).name, ev.report)], out, "metrics")
        reinit = [r["frame"] for r in records if r.get("reinit")]
        plotting.frame_curve(ev.frames, ev.fmeasure, out / "fmeasure.png", reinit)
    print(f"wrote {len(records)} masks to {out}")
    return 0


def cmd_eval(args) -> int:
    gt_dir = Path(args.gt)
    roi = _parse_roi(args.roi) if args.roi else _find_roi(gt_dir)
    ev = evaluate_directory(Path(args.input), gt_dir, roi)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    name = args.name or Path(args.input).name
    rows = [(name, ev.report)]
    _write_report(rows, out, "metrics")
    with open(out / "per_frame.csv", "w") as fh:
        fh.write("frame,fmeasure\n")
        fh.writelines(f"{n},{f:.6f}\n" for n, f in zip(ev.frames, ev.fmeasure))
    plotting.frame_curve(ev.frames, ev.fmeasure, out / "fmeasure.png", title=name)
    if ev.report.undefined:
        log.warning("zero denominators (reported as 0): %s", ", ".join(ev.report.undefined))
    sys.stdout.write(evaluation.format_table(rows))
    return 0


def _cdnet_videos(root: Path, categories, videos) -> list[tuple[str, Path]]:
    if not root.is_dir():
        raise CLIError(f"dataset root not found: {root}")
    found = []
    for cat_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        if categories and cat_dir.name not in categories:
            continue
        for vid_dir in sorted(p for p in cat_dir.iterdir() if p.is_dir()):
            if videos and vid_dir.name not in videos:
                continue
            if (vid_dir / "input").is_dir():
                found.append((cat_dir.name, vid_dir))
    if not found:
        raise CLIError(f"no <category>/<video>/input directories found under {root}")
    return found


def cmd_run_cdnet(args) -> int:
    config = _config(args)
    root, out = Path(args.input), Path(args.output)
    videos = _cdnet_videos(root, args.category, args.video)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config_used.txt").write_text(dump_config(config))
    per_category: dict[str, list[tuple[str, MetricsReport]]] = {}
    ablation_rows = []
    for category, vid_dir in videos:
        name = f"{category}/{vid_dir.name}"
        mask_dir = out / "results" / category / vid_dir.name
        gt_dir = vid_dir / "groundtruth"
        roi = _find_roi(vid_dir)
        started = time.perf_counter()
        records, stage_conf = _detect_video(
            vid_dir, mask_dir, config, args.dump_diagnostics, args.ablation,
            gt_dir if gt_dir.is_dir() else None, roi,
        )
        log.info("%s: %d frames in %.1f s", name, len(records), time.perf_counter() - started)
        if not gt_dir.is_dir():
            log.warning("%s: no groundtruth/ directory, skipping evaluation", name)
            continue
        ev = evaluate_directory(mask_dir, gt_dir, roi)
        per_category.setdefault(category, []).append((name, ev.report))
        reinit = [r["frame"] for r in records if r.get("reinit")]
        plotting.frame_curve(ev.frames, ev.fmeasure, mask_dir / "fmeasure.png", reinit, name)
        if args.ablation:
            ablation_rows += [(f"{name}:{s}", evaluation.report(stage_conf[s])) for s in STAGES]
        print(f"{name}: F-measure {ev.report.fmeasure:.4f}")
    if not per_category:
        raise CLIError("no video had ground truth; nothing to report")
    video_rows, category_rows = [], []
    for category, rows in per_category.items():
        video_rows += rows
        category_rows.append((category, evaluation.aggregate(rep for _, rep in rows)))
    overall = ("Overall", evaluation.aggregate(rep for _, rep in category_rows))
    table = video_rows + category_rows + [overall]
    evaluation.write_csv(table, out / "report.csv")
    (out / "report.txt").write_text(evaluation.format_table(table))
    plotting.metric_bars(category_rows + [overall], out / "report_categories.png")
    plotting.metric_bars(video_rows, out / "report_videos.png")
    if ablation_rows:
        _write_report(ablation_rows, out, "ablation")
    sys.stdout.write(evaluation.format_table(category_rows + [overall]))
    return 0


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cuedetect", description="Multi-cue change detection for video.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_options(p):
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--seed", type=int, help="random seed (overrides the config)")
        p.add_argument("--deterministic", action="store_true",
                       help="force sequential reductions (processing is always sequential; "
                            "accepted so scripts can state the requirement)")
        p.add_argument("--dump-diagnostics", action="store_true",
                       help="write per-frame diagnostics.jsonl and a timing figure")

    p = sub.add_parser("detect", help="label every frame of one video")
    p.add_argument("--input", required=True, help="frame directory (or a CDnet video directory)")
    p.add_argument("--output", required=True, help="directory for binNNNNNN.png masks")
    p.add_argument("--gt", help="optional ground-truth directory to evaluate against")
    p.add_argument("--roi", help="FIRST:LAST or temporalROI.txt path (with --gt)")
    run_options(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score a mask directory against ground truth")
    p.add_argument("--input", required=True, help="directory of binNNNNNN.png masks")
    p.add_argument("--gt", required=True, help="ground-truth directory (or CDnet video directory)")
    p.add_argument("--roi", help="FIRST:LAST or temporalROI.txt path; default: temporalROI.txt "
                                 "next to the ground truth, else every frame")
    p.add_argument("--output", required=True, help="directory for metrics files and figures")
    p.add_argument("--name", help="row label in the report (default: mask directory name)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run-cdnet", help="detect and score every video of a CDnet-layout dataset")
    p.add_argument("--input", required=True, help="dataset root holding <category>/<video>/")
    p.add_argument("--output", required=True, help="results root")
    p.add_argument("--category", action="append", help="restrict to a category (repeatable)")
    p.add_argument("--video", action="append", help="restrict to a video name (repeatable)")
    p.add_argument("--ablation", action="store_true",
                   help="also score the intermediate labeling stages (ablation.csv)")
    run_options(p)
    p.set_defaults(func=cmd_run_cdnet)
    return parser


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except (CLIError, ConfigError, SequenceError, OSError, ValueError) as exc:
        print(f"cuedetect {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
