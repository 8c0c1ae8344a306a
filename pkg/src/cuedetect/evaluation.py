"""CDnet-style confusion counting and metrics.

Per-video metrics come from counts pooled over the video's temporal ROI;
category metrics are unweighted means over videos and the overall row an
unweighted mean over categories.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .video_io import GT_MOVING, GT_SHADOW, GT_STATIC

METRIC_COLUMNS = (
    ("recall", "Recall"),
    ("specificity", "Specificity"),
    ("fpr", "FPR"),
    ("fnr", "FNR"),
    ("pwc", "PWC"),
    ("fmeasure", "F-Measure"),
    ("precision", "Precision"),
    ("fpr_s", "FPR-S"),
)


@dataclass
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    fp_shadow: int = 0
    n_shadow: int = 0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def accumulate(self, mask, gt) -> None:
        """Add one frame. ``mask`` is boolean-like, ``gt`` holds CDnet codes."""
        mask = np.asarray(mask).astype(bool)
        gt = np.asarray(gt)
        if mask.shape != gt.shape:
            raise ValueError(f"mask {mask.shape} and ground truth {gt.shape} differ in size")
        positive = gt == GT_MOVING
        shadow = gt == GT_SHADOW
        negative = (gt == GT_STATIC) | shadow
        self.tp += int(np.count_nonzero(mask & positive))
        self.fn += int(np.count_nonzero(~mask & positive))
        self.fp += int(np.count_nonzero(mask & negative))
        self.tn += int(np.count_nonzero(~mask & negative))
        self.fp_shadow += int(np.count_nonzero(mask & shadow))
        self.n_shadow += int(np.count_nonzero(shadow))


def accumulate(mask, gt, conf: Confusion | None = None) -> Confusion:
    conf = Confusion() if conf is None else conf
    conf.accumulate(mask, gt)
    return conf


@dataclass
class MetricsReport:
    recall: float = 0.0
    specificity: float = 0.0
    fpr: float = 0.0
    fnr: float = 0.0
    pwc: float = 0.0
    fmeasure: float = 0.0
    precision: float = 0.0
    fpr_s: float = 0.0
    # names of metrics whose denominator was zero (reported as 0)
    undefined: tuple[str, ...] = ()

    def values(self) -> list[float]:
        return [getattr(self, key) for key, _ in METRIC_COLUMNS]


def _ratio(num: float, den: float, name: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def report(conf: Confusion) -> MetricsReport:
    flags: list[str] = []
    tp, fp, fn, tn = conf.tp, conf.fp, conf.fn, conf.tn
    recall = _ratio(tp, tp + fn, "recall", flags)
    specificity = _ratio(tn, tn + fp, "specificity", flags)
    fpr = 0.0 if "specificity" in flags else 1.0 - specificity
    fnr = 0.0 if "recall" in flags else 1.0 - recall
    if "specificity" in flags:
        flags.append("fpr")
    if "recall" in flags:
        flags.append("fnr")
    pwc = 100.0 * _ratio(fn + fp, tp + fn + fp + tn, "pwc", flags)
    precision = _ratio(tp, tp + fp, "precision", flags)
    fmeasure = _ratio(2 * precision * recall, precision + recall, "fmeasure", flags)
    fpr_s = _ratio(conf.fp_shadow, conf.n_shadow, "fpr_s", flags)
    return MetricsReport(recall, specificity, fpr, fnr, pwc, fmeasure, precision, fpr_s, tuple(flags))


def aggregate(reports) -> MetricsReport:
    """Unweighted mean of several reports, metric by metric."""
    reports = list(reports)
    if not reports:
        return MetricsReport(undefined=tuple(k for k, _ in METRIC_COLUMNS))
    means = {key: float(np.mean([getattr(r, key) for r in reports])) for key, _ in METRIC_COLUMNS}
    flags = sorted({flag for r in reports for flag in r.undefined})
    return MetricsReport(**means, undefined=tuple(flags))


def write_csv(rows: list[tuple[str, MetricsReport]], path: str | Path) -> None:
    """One row per entry; columns are the name then the eight metrics."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Name"] + [title for _, title in METRIC_COLUMNS])
        for name, rep in rows:
            writer.writerow([name] + [f"{v:.6f}" for v in rep.values()])


def read_csv(path: str | Path) -> list[tuple[str, MetricsReport]]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[1:] != [title for _, title in METRIC_COLUMNS]:
            raise ValueError(f"{path}: unexpected columns {header}")
        for row in reader:
            values = dict(zip([key for key, _ in METRIC_COLUMNS], map(float, row[1:])))
            rows.append((row[0], MetricsReport(**values)))
    return rows


def format_table(rows: list[tuple[str, MetricsReport]]) -> str:
    """Plain-text aligned table in the CDnet column order."""
    name_width = max([len("Name")] + [len(name) for name, _ in rows])
    head = "Name".ljust(name_width) + "".join(f"{title:>13}" for _, title in METRIC_COLUMNS)
    lines = [head, "-" * len(head)]
    for name, rep in rows:
        lines.append(name.ljust(name_width) + "".join(f"{v:13.4f}" for v in rep.values()))
    return "\n".join(lines) + "\n"


def as_dict(rep: MetricsReport) -> dict:
    return asdict(rep)
