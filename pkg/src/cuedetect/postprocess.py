"""Area filtering and hole filling of binary foreground masks."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

_EIGHT = np.ones((3, 3), dtype=bool)
_FOUR = ndimage.generate_binary_structure(2, 1)


def area_threshold(width: int, height: int) -> int:
    """Minimum region size: 25 below twice the 320x240 pixel count, else 50."""
    return 25 if width * height < 2 * 320 * 240 else 50


def remove_small_regions(mask: np.ndarray, min_area: int) -> np.ndarray:
    """Drop 8-connected foreground components with fewer than ``min_area`` pixels."""
    mask = np.asarray(mask, dtype=bool)
    comp, n = ndimage.label(mask, structure=_EIGHT)
    if n == 0:
        return mask.copy()
    sizes = np.bincount(comp.ravel())
    keep = sizes >= min_area
    keep[0] = False
    return keep[comp]


def fill_small_holes(mask: np.ndarray, max_area: int) -> np.ndarray:
    """Fill 4-connected background pockets off the border smaller than ``max_area``."""
    mask = np.asarray(mask, dtype=bool)
    comp, n = ndimage.label(~mask, structure=_FOUR)
    if n == 0:
        return mask.copy()
    sizes = np.bincount(comp.ravel())
    border = np.unique(np.concatenate([comp[0], comp[-1], comp[:, 0], comp[:, -1]]))
    fill = sizes < max_area
    fill[0] = False
    fill[border] = False
    return mask | fill[comp]


def post_process(mask: np.ndarray, min_area: int | None = None) -> np.ndarray:
    """Area filter, then hole filling, with the resolution-dependent threshold."""
    mask = np.asarray(mask, dtype=bool)
    if min_area is None:
        min_area = area_threshold(mask.shape[1], mask.shape[0])
    return fill_small_holes(remove_small_regions(mask, min_area), min_area)
