"""Sample-based color + texture background model.

Every pixel keeps ``N`` RGB samples and, independently, ``N`` 24-bit LTP
samples. Updates are conservative (background observations only),
memoryless (a uniformly random sample is replaced) and spread to a random
8-connected neighbor. A frame-level monitor compares the model's median
image with a short-term temporal median and triggers a partial
reinitialization after drastic scene changes.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .ltp import ltp_image
from .video_io import to_gray

# 8-connected neighbor offsets, row-major
_RING = np.array(
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)], dtype=np.int64
)


def lower_median(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Per-element lower median along ``axis`` (element ``(n-1)//2`` of the sorted set)."""
    n = values.shape[axis]
    k = (n - 1) // 2
    return np.take(np.partition(values, k, axis=axis), k, axis=axis)


def temporal_median(frames) -> np.ndarray:
    """Per-pixel, per-channel lower median of a stack of RGB frames."""
    stack = np.stack([np.asarray(f, dtype=np.uint8) for f in frames])
    return lower_median(stack, axis=0)


def _clamped_grid(h: int, w: int, dy: np.ndarray, dx: np.ndarray):
    ys = np.arange(h)[:, None]
    xs = np.arange(w)[None, :]
    return np.clip(ys + dy, 0, h - 1), np.clip(xs + dx, 0, w - 1)


class BackgroundModel:
    """Per-pixel color and texture sample sets plus the update schedule.

    ``colors`` has shape ``(N, H, W, 3)`` (uint8) and ``textures`` shape
    ``(N, H, W)`` (uint32). The subsampling factor is ``fast_factor`` for the
    first ``fast_frames`` frames and for ``fast_frames`` frames after every
    reinitialization, ``slow_factor`` otherwise.
    """

    def __init__(
        self,
        colors: np.ndarray,
        textures: np.ndarray,
        rng: np.random.Generator,
        fast_frames: int = 100,
        fast_factor: int = 1,
        slow_factor: int = 10,
    ):
        if colors.shape[:3] != textures.shape or colors.shape[3] != 3:
            raise ValueError("color and texture sample arrays disagree in shape")
        self.colors = colors
        self.textures = textures
        self.rng = rng
        self.fast_frames = fast_frames
        self.fast_factor = fast_factor
        self.slow_factor = slow_factor
        self.frame_counter = 0
        self.reinit_frame: int | None = None
        self._neighbor_table = None

    @property
    def n_samples(self) -> int:
        return self.colors.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.colors.shape[1], self.colors.shape[2]

    @property
    def reinit_cooldown(self) -> int:
        """Frames still to be processed at the fast factor after a reinit."""
        if self.reinit_frame is None:
            return 0
        return max(0, self.reinit_frame + self.fast_frames - self.frame_counter)

    @property
    def subsampling_factor(self) -> int:
        if self.frame_counter <= self.fast_frames:
            return self.fast_factor
        if self.reinit_frame is not None and self.frame_counter - self.reinit_frame <= self.fast_frames:
            return self.fast_factor
        return self.slow_factor

    def advance(self) -> None:
        """Mark the start of a new frame."""
        self.frame_counter += 1

    def median_image(self) -> np.ndarray:
        """Per-pixel, per-channel lower median of the color samples."""
        return lower_median(self.colors, axis=0)

    def _neighbors(self):
        # valid-neighbor flags, shape (H, W, 8)
        if self._neighbor_table is None:
            h, w = self.shape
            ys = np.arange(h)[:, None, None] + _RING[:, 0]
            xs = np.arange(w)[None, :, None] + _RING[:, 1]
            self._neighbor_table = (ys >= 0) & (ys < h) & (xs >= 0) & (xs < w)
        return self._neighbor_table

    def update(self, candidates: np.ndarray, rgb: np.ndarray, codes: np.ndarray) -> None:
        """Insert the current observation at background-candidate pixels.

        Each candidate replaces one random color sample and one random
        texture sample of its own model with probability ``1/factor``, and,
        with an independent draw at the same probability, one random color
        and texture sample of a uniformly chosen 8-connected neighbor.
        Self-updates are applied first, then propagations in row-major order
        of the source pixel (later writes win).
        """
        candidates = np.asarray(candidates, dtype=bool)
        h, w = self.shape
        n = self.n_samples
        p = 1.0 / self.subsampling_factor
        rng = self.rng

        self_hit = candidates & (rng.random((h, w)) < p)
        prop_hit = candidates & (rng.random((h, w)) < p)

        ys, xs = np.nonzero(self_hit)
        if ys.size:
            ci = rng.integers(0, n, ys.size)
            ti = rng.integers(0, n, ys.size)
            self.colors[ci, ys, xs] = rgb[ys, xs]
            self.textures[ti, ys, xs] = codes[ys, xs]

        ys, xs = np.nonzero(prop_hit)
        if ys.size == 0:
            return
        valid = self._neighbors()[ys, xs]
        n_valid = valid.sum(axis=1)
        keep = n_valid > 0
        ys, xs, valid, n_valid = ys[keep], xs[keep], valid[keep], n_valid[keep]
        if ys.size == 0:
            return
        pick = np.minimum((rng.random(ys.size) * n_valid).astype(np.int64), n_valid - 1)
        direction = np.argmax(np.cumsum(valid, axis=1) > pick[:, None], axis=1)
        ty = ys + _RING[direction, 0]
        tx = xs + _RING[direction, 1]
        ci = rng.integers(0, n, ys.size)
        ti = rng.integers(0, n, ys.size)
        self._write_last_wins(self.colors, ci, ty, tx, rgb[ys, xs])
        self._write_last_wins(self.textures, ti, ty, tx, codes[ys, xs])

    @staticmethod
    def _write_last_wins(store, si, ty, tx, values):
        h, w = store.shape[1], store.shape[2]
        flat = (si * h + ty) * w + tx
        # index of the last occurrence of each target slot
        _, first_in_reversed = np.unique(flat[::-1], return_index=True)
        last = flat.size - 1 - first_in_reversed
        store[si[last], ty[last], tx[last]] = values[last]

    def reinitialize(self, rgb: np.ndarray, codes: np.ndarray) -> None:
        """Partial reinitialization from the current frame.

        At every pixel ``ceil(N/2)`` distinct, uniformly chosen color samples
        are overwritten with colors taken at random 3x3-neighborhood
        positions of ``rgb``; texture samples are refreshed the same way with
        independent draws. The fast subsampling factor applies afterwards.
        """
        h, w = self.shape
        n = self.n_samples
        k = math.ceil(n / 2)
        rng = self.rng
        for store, source in ((self.colors, rgb), (self.textures, codes)):
            chosen = np.argsort(rng.random((n, h, w)), axis=0, kind="stable")[:k]
            dy = rng.integers(-1, 2, (k, h, w))
            dx = rng.integers(-1, 2, (k, h, w))
            yy, xx = _clamped_grid(h, w, dy, dx)
            py = np.broadcast_to(np.arange(h)[None, :, None], (k, h, w))
            px = np.broadcast_to(np.arange(w)[None, None, :], (k, h, w))
            store[chosen, py, px] = source[yy, xx]
        self.reinit_frame = self.frame_counter


def init_model(
    first_rgb: np.ndarray,
    median_rgb: np.ndarray,
    seed: int | np.random.Generator | None = 0,
    n_samples: int = 50,
    tau: float = 0.1,
    nu: float = 5,
    **schedule,
) -> BackgroundModel:
    """Populate a model from the first frame and a temporal median image.

    Each color sample picks its source image (first frame or median) with
    probability 1/2 and a uniformly random position in the clamped 3x3
    neighborhood; texture samples are drawn the same way, independently,
    from the LTP images of the two sources.
    """
    first_rgb = np.asarray(first_rgb, dtype=np.uint8)
    median_rgb = np.asarray(median_rgb, dtype=np.uint8)
    if first_rgb.shape != median_rgb.shape:
        raise ValueError("first frame and median frame differ in shape")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    h, w = first_rgb.shape[:2]
    sources_rgb = np.stack([first_rgb, median_rgb])
    sources_ltp = np.stack(
        [ltp_image(to_gray(first_rgb), tau, nu), ltp_image(to_gray(median_rgb), tau, nu)]
    )

    def draw(sources):
        which = rng.integers(0, 2, (n_samples, h, w))
        dy = rng.integers(-1, 2, (n_samples, h, w))
        dx = rng.integers(-1, 2, (n_samples, h, w))
        yy, xx = _clamped_grid(h, w, dy, dx)
        return sources[which, yy, xx]

    colors = np.ascontiguousarray(draw(sources_rgb), dtype=np.uint8)
    textures = np.ascontiguousarray(draw(sources_ltp), dtype=np.uint32)
    return BackgroundModel(colors, textures, rng, **schedule)


def downscale(image: np.ndarray, factor: int) -> np.ndarray:
    """Box-average downscaling; partial border blocks are edge-padded."""
    image = np.asarray(image, dtype=np.float64)
    if factor <= 1:
        return image
    h, w = image.shape[:2]
    ph, pw = -h % factor, -w % factor
    pad = [(0, ph), (0, pw)] + [(0, 0)] * (image.ndim - 2)
    image = np.pad(image, pad, mode="edge")
    hh, ww = image.shape[0] // factor, image.shape[1] // factor
    blocks = image.reshape(hh, factor, ww, factor, *image.shape[2:])
    return blocks.mean(axis=(1, 3))


@dataclass(frozen=True)
class Disparity:
    mean_distance: float
    changed_fraction: float
    spatial_disorder: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mean_distance, self.changed_fraction, self.spatial_disorder)


def disparities(model_image, recent_image, significance: float = 30.0, grid: int = 8) -> Disparity:
    """Disparity triple between the model's median image and the recent median.

    The first two values are the mean RGB Euclidean distance and the share of
    pixels farther apart than ``significance``. The third is the exponential
    entropy of how those pixels spread over a ``grid x grid`` partition of
    the image (1 when none are found).
    """
    a = np.asarray(model_image, dtype=np.float64)
    b = np.asarray(recent_image, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("disparity images differ in shape")
    dist = np.sqrt(((a - b) ** 2).sum(axis=-1))
    changed = dist > significance
    h, w = changed.shape
    cy = (np.arange(h) * grid) // h
    cx = (np.arange(w) * grid) // w
    cell = (cy[:, None] * grid + cx[None, :])[changed]
    if cell.size:
        p = np.bincount(cell, minlength=grid * grid) / cell.size
        p = p[p > 0]
        disorder = float(np.exp(-(p * np.log(p)).sum()))
    else:
        disorder = 1.0
    return Disparity(float(dist.mean()), float(changed.mean()), disorder)


class ReinitMonitor:
    """Decides when a drastic background change calls for reinitialization.

    Downscaled frames enter a ring buffer every ``stride`` frames; the ring
    spans the last ``window`` frames. Every ``check_every`` frames outside
    the post-reinit cooldown the disparity triple is evaluated against
    ``thresholds`` (all three must be exceeded).
    """

    def __init__(
        self,
        factor: int = 4,
        window: int = 30,
        stride: int = 5,
        significance: float = 30.0,
        grid: int = 8,
        thresholds: tuple[float, float, float] = (10.0, 0.5, 2.65),
        check_every: int = 10,
    ):
        self.factor = factor
        self.stride = stride
        self.significance = significance
        self.grid = grid
        self.thresholds = thresholds
        self.check_every = check_every
        self.buffer: deque[np.ndarray] = deque(maxlen=max(1, window // stride))
        self.last: Disparity | None = None

    def observe(self, frame_counter: int, rgb: np.ndarray) -> None:
        if frame_counter % self.stride == 0:
            self.buffer.append(downscale(rgb, self.factor))

    def recent_median(self) -> np.ndarray:
        return lower_median(np.stack(self.buffer), axis=0)

    def exceeds(self, d: Disparity) -> bool:
        t1, t2, t3 = self.thresholds
        return d.mean_distance > t1 and d.changed_fraction > t2 and d.spatial_disorder > t3

    def evaluate(self, model: BackgroundModel) -> Disparity:
        model_image = downscale(model.median_image(), self.factor)
        return disparities(model_image, self.recent_median(), self.significance, self.grid)

    def due(self, model: BackgroundModel) -> bool:
        return (
            model.frame_counter % self.check_every == 0
            and model.reinit_cooldown == 0
            and len(self.buffer) >= 2
        )

    def check(self, model: BackgroundModel) -> tuple[bool, Disparity | None]:
        """Evaluate the trigger if a check is due; ``(False, None)`` otherwise."""
        if not self.due(model):
            return False, None
        d = self.evaluate(model)
        self.last = d
        return self.exceeds(d), d
