"""Online foreground/background feature densities and Bayes soft-labeling.

Foreground training pixels for one feature are picked by the *other*
features exceeding confident thresholds; background training pixels are the
complement of the dilated confident-foreground mask. The six class
conditional densities (BV, CV, TV x FG, BG) are integer histograms smoothed
with a truncated Gaussian kernel. The foreground prior is a per-pixel
running average of past labels.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.special import expit

from .features import FeatureMaps

BV_SUPPORT = (-443, 443)
CV_SUPPORT = (0, 443)
TV_SUPPORT = (0, 24)

DENSITY_FLOOR = 1e-12
POSTERIOR_EPS = 1e-6


@dataclass(frozen=True)
class Thresholds:
    bv: float = 50.0
    cv: float = 20.0
    tv: float = 8.0


class Histogram:
    """Integer-binned counts with a Gaussian-kernel density estimate.

    Each count at bin ``v`` spreads over ``v +- truncate*bandwidth`` with
    weights renormalized to sum to one inside the support, so the density
    sums to exactly one over the support. While fewer than ``min_total``
    values have been seen the density is uniform.
    """

    def __init__(self, lo: int, hi: int, bandwidth: float = 2.0, truncate: float = 4.0,
                 min_total: float = 1000):
        if hi < lo:
            raise ValueError("empty histogram support")
        self.lo = int(lo)
        self.hi = int(hi)
        self.bandwidth = float(bandwidth)
        self.min_total = min_total
        self.counts = np.zeros(self.hi - self.lo + 1, dtype=np.float64)
        radius = int(np.ceil(truncate * bandwidth))
        offsets = np.arange(-radius, radius + 1)
        self._kernel = np.exp(-0.5 * (offsets / bandwidth) ** 2) / (bandwidth * np.sqrt(2 * np.pi))
        self._radius = radius
        # per-bin normalizer of the truncated kernel restricted to the support
        inside = np.convolve(np.ones(self.size), self._kernel)[radius : radius + self.size]
        self._norm = inside
        self._table: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def bins(self, values) -> np.ndarray:
        """Support index of each value: round half-up, clamp into the support."""
        q = np.floor(np.asarray(values, dtype=np.float64) + 0.5)
        return (np.clip(q, self.lo, self.hi) - self.lo).astype(np.int64)

    def add(self, values) -> None:
        idx = self.bins(values).ravel()
        if idx.size:
            self.counts += np.bincount(idx, minlength=self.size)
            self._table = None

    def decay(self, factor: float) -> None:
        if factor != 1.0:
            self.counts *= factor
            self._table = None

    def table(self) -> np.ndarray:
        """Density at every support point."""
        if self._table is None:
            total = self.total
            if total < max(self.min_total, np.finfo(float).tiny):
                self._table = np.full(self.size, 1.0 / self.size)
            else:
                weights = self.counts / self._norm / total
                full = np.convolve(weights, self._kernel)
                self._table = full[self._radius : self._radius + self.size]
        return self._table

    def density(self, values) -> np.ndarray:
        return self.table()[self.bins(values)]


class ClassConditionalModel:
    """The six feature histograms and the training-pixel selection rules."""

    FEATURES = ("bv", "cv", "tv")

    def __init__(self, thresholds: Thresholds = Thresholds(), bandwidth: float = 2.0,
                 min_total: float = 1000, forgetting: float = 1.0, dilation: int = 3):
        self.thresholds = thresholds
        self.forgetting = forgetting
        self.dilation = dilation
        supports = {"bv": BV_SUPPORT, "cv": CV_SUPPORT, "tv": TV_SUPPORT}
        self.hist = {
            (cls, feat): Histogram(*supports[feat], bandwidth=bandwidth, min_total=min_total)
            for cls in ("fg", "bg")
            for feat in self.FEATURES
        }

    @property
    def ready(self) -> bool:
        """True once every histogram has left its uniform warm-up state."""
        return all(h.total >= h.min_total for h in self.hist.values())

    def confident_foreground(self, fm: FeatureMaps) -> np.ndarray:
        t = self.thresholds
        return (np.abs(fm.bv) > t.bv) | (fm.cv > t.cv) | (fm.tv > t.tv)

    def foreground_gates(self, fm: FeatureMaps) -> dict[str, np.ndarray]:
        """Per-feature masks of pixels used to train that feature's FG density."""
        t = self.thresholds
        big_bv = np.abs(fm.bv) > t.bv
        big_cv = fm.cv > t.cv
        big_tv = fm.tv > t.tv
        return {"bv": big_cv | big_tv, "cv": big_bv | big_tv, "tv": big_bv | big_cv}

    def plausible_background(self, fm: FeatureMaps) -> np.ndarray:
        """Complement of the confident-foreground mask dilated by a square."""
        confident = self.confident_foreground(fm)
        structure = np.ones((self.dilation, self.dilation), dtype=bool)
        return ~ndimage.binary_dilation(confident, structure=structure)

    def accumulate_foreground(self, fm: FeatureMaps) -> None:
        for feat, gate in self.foreground_gates(fm).items():
            self.hist["fg", feat].add(getattr(fm, feat)[gate])

    def accumulate_background(self, fm: FeatureMaps, mask: np.ndarray) -> None:
        for feat in self.FEATURES:
            self.hist["bg", feat].add(getattr(fm, feat)[mask])

    def accumulate(self, fm: FeatureMaps) -> np.ndarray:
        """Add one frame of training data; returns the plausible-background mask."""
        if self.forgetting != 1.0:
            for h in self.hist.values():
                h.decay(self.forgetting)
        self.accumulate_foreground(fm)
        mask = self.plausible_background(fm)
        self.accumulate_background(fm, mask)
        return mask

    def log_likelihood(self, fm: FeatureMaps, cls: str) -> np.ndarray:
        out = np.zeros(fm.shape)
        for feat in self.FEATURES:
            d = self.hist[cls, feat].density(getattr(fm, feat))
            out += np.log(np.maximum(d, DENSITY_FLOOR))
        return out

    def posterior(self, fm: FeatureMaps, prior_fg) -> np.ndarray:
        """Foreground posterior of every pixel, clamped to [1e-6, 1-1e-6]."""
        return posterior_from_log(self.log_likelihood(fm, "fg"), self.log_likelihood(fm, "bg"), prior_fg)


def posterior_from_log(log_fg, log_bg, prior_fg) -> np.ndarray:
    prior_fg = np.asarray(prior_fg, dtype=np.float64)
    z = np.asarray(log_fg) + np.log(prior_fg) - np.asarray(log_bg) - np.log1p(-prior_fg)
    return np.clip(expit(z), POSTERIOR_EPS, 1.0 - POSTERIOR_EPS)


def posterior(l_fg, l_bg, prior_fg):
    """Foreground posterior from the two class likelihoods and the prior."""
    tiny = 1e-300
    return posterior_from_log(
        np.log(np.maximum(l_fg, tiny)), np.log(np.maximum(l_bg, tiny)), prior_fg
    )


class PriorMap:
    """Per-pixel foreground prior, a slow running average of final labels."""

    def __init__(self, shape, initial: float = 0.1, rate: float = 0.001,
                 floor: float = 0.01, ceiling: float = 0.99):
        self.rate = rate
        self.floor = floor
        self.ceiling = ceiling
        self.values = np.full(shape, float(np.clip(initial, floor, ceiling)))

    def update(self, labels) -> None:
        labels = np.asarray(labels, dtype=np.float64)
        self.values = np.clip((1.0 - self.rate) * self.values + self.rate * labels,
                              self.floor, self.ceiling)


def update_prior(prior, label, rate: float = 0.001, floor: float = 0.01, ceiling: float = 0.99):
    return np.clip((1.0 - rate) * np.asarray(prior, dtype=np.float64) + rate * np.asarray(label),
                   floor, ceiling)


# Checkpoint layout (little-endian): magic, u32 version, u32 histogram count,
# then per histogram i32 lo, i32 hi and f64 counts; then u32 H, u32 W,
# f64 prior values (row-major) and f64 rate.
_MAGIC = b"CUEDSTAT"
_VERSION = 1
_ORDER = [(c, f) for c in ("fg", "bg") for f in ("bv", "cv", "tv")]


def save_state(path: str | Path, model: ClassConditionalModel, priors: PriorMap) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(_ORDER)))
        for key in _ORDER:
            h = model.hist[key]
            fh.write(struct.pack("<ii", h.lo, h.hi))
            fh.write(h.counts.astype("<f8").tobytes())
        rows, cols = priors.values.shape
        fh.write(struct.pack("<II", rows, cols))
        fh.write(priors.values.astype("<f8").tobytes())
        fh.write(struct.pack("<d", priors.rate))


def load_state(path: str | Path, model: ClassConditionalModel, priors: PriorMap) -> None:
    """Restore histogram counts and priors saved by :func:`save_state` in place."""
    data = Path(path).read_bytes()
    if data[:8] != _MAGIC:
        raise ValueError(f"{path}: not a state checkpoint")
    version, count = struct.unpack_from("<II", data, 8)
    if version != _VERSION or count != len(_ORDER):
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    pos = 16
    for key in _ORDER:
        lo, hi = struct.unpack_from("<ii", data, pos)
        pos += 8
        h = model.hist[key]
        if (lo, hi) != (h.lo, h.hi):
            raise ValueError(f"{path}: support mismatch for {key}")
        n = hi - lo + 1
        h.counts = np.frombuffer(data, dtype="<f8", count=n, offset=pos).astype(np.float64)
        h._table = None
        pos += 8 * n
    rows, cols = struct.unpack_from("<II", data, pos)
    pos += 8
    if (rows, cols) != priors.values.shape:
        raise ValueError(f"{path}: prior map is {rows}x{cols}, expected {priors.values.shape}")
    priors.values = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=pos).reshape(rows, cols).copy()
    pos += 8 * rows * cols
    (priors.rate,) = struct.unpack_from("<d", data, pos)
