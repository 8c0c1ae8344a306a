"""SLIC superpixels in RGB space with 4-connectivity enforcement."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

# Compactness is specified on the usual CIELAB scale; RGB distances span
# roughly 2.55x that range, so the spatial weight is scaled to match.
RGB_SCALE = 2.55

_FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass
class SuperpixelMap:
    labels: np.ndarray
    count: int
    adjacency: np.ndarray = field(repr=False)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.count)

    def members(self) -> list[np.ndarray]:
        """Flat pixel indices of every superpixel."""
        flat = self.labels.ravel()
        order = np.argsort(flat, kind="stable")
        return np.split(order, np.cumsum(self.sizes)[:-1])


def adjacency_pairs(labels: np.ndarray) -> np.ndarray:
    """Sorted ``(a, b)`` pairs, ``a < b``, of 4-adjacent distinct labels."""
    pairs = []
    for a, b in ((labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])):
        diff = a != b
        if diff.any():
            pairs.append(np.stack([np.minimum(a[diff], b[diff]), np.maximum(a[diff], b[diff])], axis=1))
    if not pairs:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(np.concatenate(pairs).astype(np.int64), axis=0)


def _from_labels(labels: np.ndarray) -> SuperpixelMap:
    _, inverse = np.unique(labels, return_inverse=True)
    labels = inverse.reshape(labels.shape).astype(np.int64)
    return SuperpixelMap(labels, int(labels.max()) + 1, adjacency_pairs(labels))


def _gradient(img: np.ndarray) -> np.ndarray:
    p = np.pad(img, ((1, 1), (1, 1), (0, 0)), mode="edge")
    gx = p[1:-1, 2:] - p[1:-1, :-2]
    gy = p[2:, 1:-1] - p[:-2, 1:-1]
    return (gx**2).sum(axis=-1) + (gy**2).sum(axis=-1)


def _seed_centers(img: np.ndarray, step: int) -> np.ndarray:
    """Grid centers (y, x, r, g, b), each nudged to the lowest gradient in its 3x3."""
    h, w = img.shape[:2]
    ny = max(1, int(round(h / step)))
    nx = max(1, int(round(w / step)))
    grad = _gradient(img)
    centers = []
    for i in range(ny):
        for j in range(nx):
            cy = (i + 0.5) * h / ny - 0.5
            cx = (j + 0.5) * w / nx - 0.5
            iy, ix = int(round(cy)), int(round(cx))
            best = grad[iy, ix]
            for yy in range(max(iy - 1, 0), min(iy + 2, h)):
                for xx in range(max(ix - 1, 0), min(ix + 2, w)):
                    if grad[yy, xx] < best:
                        best, cy, cx = grad[yy, xx], float(yy), float(xx)
            y0, x0 = int(round(cy)), int(round(cx))
            centers.append([cy, cx, *img[y0, x0]])
    return np.array(centers, dtype=np.float64)


def _assign(img, centers, step, spatial_weight):
    h, w = img.shape[:2]
    best = np.full((h, w), np.inf)
    labels = np.full((h, w), -1, dtype=np.int64)
    ys = np.arange(h, dtype=np.float64)
    xs = np.arange(w, dtype=np.float64)
    for k, (cy, cx, *color) in enumerate(centers):
        y0, y1 = max(int(np.floor(cy - step)), 0), min(int(np.ceil(cy + step)) + 1, h)
        x0, x1 = max(int(np.floor(cx - step)), 0), min(int(np.ceil(cx + step)) + 1, w)
        if y0 >= y1 or x0 >= x1:
            continue
        patch = img[y0:y1, x0:x1]
        dc = ((patch - np.asarray(color)) ** 2).sum(axis=-1)
        ds = (ys[y0:y1, None] - cy) ** 2 + (xs[None, x0:x1] - cx) ** 2
        d = dc + ds * spatial_weight
        region = best[y0:y1, x0:x1]
        closer = d < region
        region[closer] = d[closer]
        labels[y0:y1, x0:x1][closer] = k
    missing = labels < 0
    if missing.any():
        my, mx = np.nonzero(missing)
        dc = ((img[my, mx][:, None, :] - centers[None, :, 2:]) ** 2).sum(axis=-1)
        ds = (my[:, None] - centers[None, :, 0]) ** 2 + (mx[:, None] - centers[None, :, 1]) ** 2
        labels[my, mx] = np.argmin(dc + ds * spatial_weight, axis=1)
    return labels


def _update_centers(img, labels, centers):
    h, w = labels.shape
    k = len(centers)
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=k).astype(np.float64)
    yy, xx = np.mgrid[0:h, 0:w]
    cols = [yy.ravel(), xx.ravel()] + [img[..., c].ravel() for c in range(3)]
    sums = np.stack([np.bincount(flat, weights=c, minlength=k) for c in cols], axis=1)
    out = centers.copy()
    nonempty = counts > 0
    out[nonempty] = sums[nonempty] / counts[nonempty, None]
    return out


def enforce_connectivity(labels: np.ndarray) -> np.ndarray:
    """Split labels into 4-connected pieces; absorb stray pieces into neighbors.

    For every label its largest 4-connected piece keeps the label. Each other
    piece is merged, in ascending piece order, into the adjacent region that is
    currently largest (ties to the lower id).
    """
    labels = np.asarray(labels, dtype=np.int64)
    n_labels = int(labels.max()) + 1
    piece = labels.copy()
    next_id = n_labels
    for lab, box in enumerate(ndimage.find_objects(labels + 1)):
        if box is None:
            continue
        sub = labels[box] == lab
        comp, n = ndimage.label(sub, structure=_FOUR)
        if n <= 1:
            continue
        sizes = np.bincount(comp.ravel())[1:]
        keep = int(np.argmax(sizes)) + 1
        view = piece[box]
        for c in range(1, n + 1):
            if c != keep:
                view[comp == c] = next_id
                next_id += 1
    if next_id == n_labels:
        return labels

    size = np.bincount(piece.ravel(), minlength=next_id).astype(np.int64)
    parent = np.arange(next_id)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    neighbors: dict[int, set[int]] = {}
    for a, b in adjacency_pairs(piece):
        neighbors.setdefault(int(a), set()).add(int(b))
        neighbors.setdefault(int(b), set()).add(int(a))
    for orphan in range(n_labels, next_id):
        root = find(orphan)
        if root < n_labels:
            continue
        candidates = {find(nb) for nb in neighbors.get(orphan, ())} - {root}
        if not candidates:
            continue
        target = min(candidates, key=lambda r: (-size[r], r))
        parent[root] = target
        size[target] += size[root]
    roots = np.array([find(i) for i in range(next_id)])
    return roots[piece]


def slic(rgb, region_size: int = 16, compactness: float = 10.0, iterations: int = 5,
         rgb_scale: float = RGB_SCALE) -> SuperpixelMap:
    """Segment ``rgb`` into roughly ``region_size``-wide compact superpixels.

    Distance between a pixel and a cluster center is
    ``sqrt(d_rgb**2 + (d_xy / S)**2 * (m * rgb_scale)**2)``, searched in a
    2S x 2S window around each center. Images smaller than S x S yield a
    single superpixel.
    """
    img = np.asarray(rgb, dtype=np.float64)
    if img.ndim != 3 or img.shape[0] == 0 or img.shape[1] == 0:
        raise ValueError(f"expected a non-empty HxWx3 image, got {img.shape}")
    h, w = img.shape[:2]
    if region_size < 1:
        raise ValueError("region_size must be positive")
    if h < region_size and w < region_size:
        return _from_labels(np.zeros((h, w), dtype=np.int64))
    spatial_weight = (compactness * rgb_scale / region_size) ** 2
    centers = _seed_centers(img, region_size)
    labels = None
    for it in range(max(1, iterations)):
        labels = _assign(img, centers, region_size, spatial_weight)
        if it < iterations - 1:
            centers = _update_centers(img, labels, centers)
    return _from_labels(enforce_connectivity(labels))
