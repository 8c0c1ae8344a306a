"""Brightness, chromaticity and texture variation against the background model.

For each pixel the three color samples nearest the observation (RGB
Euclidean distance, ties to the lower sample index) are decomposed along the
sample's chromaticity line: the brightness variation is the signed distance
of the brightness-scaled sample from the sample, the chromaticity variation
the orthogonal residual. Medians over the three give BV and CV. Texture
variation is the median of the three smallest Hamming distances between the
current LTP code and the texture samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ltp import hamming

N_CLOSE = 3


def alpha(obs, ref) -> np.ndarray:
    """Brightness ratio of ``obs`` relative to ``ref``; 1 when ``ref`` is (near) black."""
    o = np.asarray(obs, dtype=np.float64)
    e = np.asarray(ref, dtype=np.float64)
    ee = (e * e).sum(axis=-1)
    oe = (o * e).sum(axis=-1)
    safe = np.where(ee < 1.0, 1.0, ee)
    return np.where(ee < 1.0, 1.0, oe / safe)


def brightness_chroma(obs, ref) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample (BV, CV) of observation ``obs`` against sample ``ref``."""
    o = np.asarray(obs, dtype=np.float64)
    e = np.asarray(ref, dtype=np.float64)
    a = alpha(o, e)
    norm_e = np.sqrt((e * e).sum(axis=-1))
    bv = (a - 1.0) * norm_e
    cv = np.sqrt(((o - a[..., None] * e) ** 2).sum(axis=-1))
    return bv, cv


def _closest(dist: np.ndarray, k: int) -> np.ndarray:
    """Sample indices of the ``k`` smallest integer distances along axis 0.

    Distances are made unique by folding in the sample index, so ties go to
    the lower index. Returned indices are ordered by increasing distance.
    """
    n = dist.shape[0]
    dtype = np.int32 if int(dist.max(initial=0)) < (2**31 - 1) // max(n, 1) - 1 else np.int64
    idx = np.arange(n, dtype=dtype).reshape((n,) + (1,) * (dist.ndim - 1))
    key = dist.astype(dtype) * n + idx
    if k < n:
        key = np.partition(key, k - 1, axis=0)[:k]
    key = np.sort(key, axis=0)
    return key % n


def color_features(rgb: np.ndarray, colors: np.ndarray, n_close: int = N_CLOSE):
    """BV and CV maps for an ``(H, W, 3)`` frame against ``(N, H, W, 3)`` samples."""
    o = np.asarray(rgb, dtype=np.int32)
    dist2 = np.zeros(colors.shape[:3], dtype=np.int32)
    for ch in range(3):
        d = colors[..., ch].astype(np.int32) - o[None, ..., ch]
        dist2 += d * d
    nearest = _closest(dist2, n_close)
    h, w = o.shape[:2]
    ys = np.arange(h)[None, :, None]
    xs = np.arange(w)[None, None, :]
    picked = colors[nearest, ys, xs]
    bv, cv = brightness_chroma(o[None].astype(np.float64), picked)
    return np.median(bv, axis=0), np.median(cv, axis=0)


def texture_feature(codes: np.ndarray, textures: np.ndarray, n_close: int = N_CLOSE):
    """TV map: median of the ``n_close`` smallest Hamming distances."""
    dist = hamming(textures, np.asarray(codes, dtype=np.uint32)[None])
    k = min(n_close, dist.shape[0])
    smallest = np.sort(np.partition(dist, k - 1, axis=0)[:k], axis=0)
    return np.median(smallest, axis=0)


def extract_color_features(obs, color_samples, n_close: int = N_CLOSE) -> tuple[float, float]:
    """Single-pixel (BV, CV) from an RGB triple and ``(N, 3)`` color samples."""
    samples = np.asarray(color_samples).reshape(-1, 1, 1, 3)
    bv, cv = color_features(np.asarray(obs).reshape(1, 1, 3), samples, n_close)
    return float(bv[0, 0]), float(cv[0, 0])


def extract_texture_feature(code, texture_samples, n_close: int = N_CLOSE) -> int:
    """Single-pixel TV from an LTP code and ``(N,)`` texture samples."""
    samples = np.asarray(texture_samples, dtype=np.uint32).reshape(-1, 1, 1)
    tv = texture_feature(np.array([[code]], dtype=np.uint32), samples, n_close)
    return int(tv[0, 0])


@dataclass
class FeatureMaps:
    bv: np.ndarray
    cv: np.ndarray
    tv: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.bv.shape


def extract(rgb: np.ndarray, codes: np.ndarray, model, n_close: int = N_CLOSE) -> FeatureMaps:
    """All three variation maps of one frame against ``model``."""
    bv, cv = color_features(rgb, model.colors, n_close)
    tv = texture_feature(codes, model.textures, n_close)
    return FeatureMaps(bv, cv, np.asarray(tv, dtype=np.int64))


def criterion1(bv, cv, tv, bounds: tuple[float, float, float] = (15.0, 15.0, 8.0)):
    """Strict test that a pixel looks like the background (elementwise)."""
    b, c, t = bounds
    return (np.abs(bv) < b) & (np.asarray(cv) < c) & (np.asarray(tv) < t)
