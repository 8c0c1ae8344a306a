"""Synthetic videos with exact ground truth."""

from __future__ import annotations

import numpy as np

from .video_io import GT_MOVING, GT_STATIC


def _bounce(start: int, velocity: int, low: int, high: int, steps: int) -> list[int]:
    pos, v, out = start, velocity, []
    for _ in range(steps):
        out.append(pos)
        nxt = pos + v
        if nxt < low or nxt > high:
            v = -v
            nxt = pos + v
        pos = nxt
    return out


def moving_square(n_frames: int = 300, width: int = 160, height: int = 120, size: int = 20,
                  velocity: tuple[int, int] = (3, 2), background=(0, 0, 0),
                  color=(255, 255, 255), noise: float = 0.0, seed: int = 0):
    """Frames and ground-truth codes of a square bouncing around the image.

    Returns ``(frames, gts)``: lists of ``(H, W, 3)`` uint8 frames and
    ``(H, W)`` uint8 CDnet codes (255 inside the square, 0 elsewhere).
    """
    rng = np.random.default_rng(seed)
    xs = _bounce(width // 4, velocity[0], 0, width - size, n_frames)
    ys = _bounce(height // 4, velocity[1], 0, height - size, n_frames)
    frames, gts = [], []
    base = np.empty((height, width, 3), dtype=np.float64)
    base[:] = background
    for x, y in zip(xs, ys):
        img = base.copy()
        img[y : y + size, x : x + size] = color
        if noise:
            img += rng.normal(0.0, noise, img.shape)
        frames.append(np.clip(np.rint(img), 0, 255).astype(np.uint8))
        gt = np.full((height, width), GT_STATIC, dtype=np.uint8)
        gt[y : y + size, x : x + size] = GT_MOVING
        gts.append(gt)
    return frames, gts


def _scene(width: int, height: int, variant: int) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    u, v = xx / max(width - 1, 1), yy / max(height - 1, 1)
    if variant == 0:
        rgb = np.stack([40 + 120 * u, 60 + 100 * v, 90 + 20 * np.sin(6 * u)], axis=-1)
    else:
        rgb = np.stack([210 - 90 * v, 190 - 100 * u, 200 - 40 * np.cos(5 * v)], axis=-1)
    return rgb


def scene_cut(n_frames: int = 400, cut: int = 200, width: int = 160, height: int = 120,
              size: int = 20, noise: float = 2.0, seed: int = 0):
    """A moving square over one backdrop that is swapped for another at frame ``cut``.

    ``cut`` is 1-based: frames ``cut, cut+1, ...`` show the second backdrop.
    """
    rng = np.random.default_rng(seed)
    scenes = [_scene(width, height, 0), _scene(width, height, 1)]
    xs = _bounce(width // 4, 3, 0, width - size, n_frames)
    ys = _bounce(height // 4, 2, 0, height - size, n_frames)
    frames, gts = [], []
    for i, (x, y) in enumerate(zip(xs, ys), start=1):
        img = scenes[0 if i < cut else 1].copy()
        img[y : y + size, x : x + size] = (250, 250, 30)
        if noise:
            img += rng.normal(0.0, noise, img.shape)
        frames.append(np.clip(np.rint(img), 0, 255).astype(np.uint8))
        gt = np.full((height, width), GT_STATIC, dtype=np.uint8)
        gt[y : y + size, x : x + size] = GT_MOVING
        gts.append(gt)
    return frames, gts
