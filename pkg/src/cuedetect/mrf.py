"""Two-layer MRF over pixels and superpixels, solved with min-sum loopy BP.

Node layout: pixel ``i`` (row-major) is node ``i``; superpixel ``s`` is node
``n_pixels + s``. Every pairwise term is a Potts cost paid when the two
labels differ: color-weighted ``phi * exp(-|dO|^2 / sigma)`` on 4-neighbor
pixel pairs, ``xi`` on adjacent superpixels and ``psi`` between a pixel and
its superpixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .superpixels import SuperpixelMap


@dataclass
class TwoLayerGraph:
    height: int
    width: int
    pixel_cost: np.ndarray        # (P, 2): cost of label 0 / label 1
    pixel_edges: np.ndarray       # (Ep, 2) node pairs
    pixel_weights: np.ndarray     # (Ep,)
    sp_cost: np.ndarray           # (S, 2)
    sp_edges: np.ndarray          # (Es, 2) superpixel ids
    membership: np.ndarray        # (P,) superpixel id of each pixel
    xi: float = 150.0
    psi: float = 5.0

    @property
    def n_pixels(self) -> int:
        return self.pixel_cost.shape[0]

    @property
    def n_superpixels(self) -> int:
        return self.sp_cost.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.n_pixels + self.n_superpixels

    def unary(self) -> np.ndarray:
        return np.concatenate([self.pixel_cost, self.sp_cost])

    def potts_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """All pairwise terms as node pairs and Potts weights."""
        p = self.n_pixels
        parts = [(self.pixel_edges, self.pixel_weights)]
        if self.n_superpixels:
            parts.append((self.sp_edges + p, np.full(len(self.sp_edges), float(self.xi))))
            member = np.stack([np.arange(p), self.membership + p], axis=1)
            parts.append((member, np.full(p, float(self.psi))))
        edges = np.concatenate([e.reshape(-1, 2) for e, _ in parts]).astype(np.int64)
        weights = np.concatenate([w for _, w in parts]).astype(np.float64)
        return edges, weights


def grid_edges(h: int, w: int) -> np.ndarray:
    """4-neighbor pixel pairs of an ``h x w`` grid (horizontal, then vertical)."""
    idx = np.arange(h * w).reshape(h, w)
    horiz = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    vert = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    return np.concatenate([horiz, vert])


def contrast_weights(rgb: np.ndarray, edges: np.ndarray, phi: float, sigma: float) -> np.ndarray:
    flat = np.asarray(rgb, dtype=np.float64).reshape(-1, 3)
    d2 = ((flat[edges[:, 0]] - flat[edges[:, 1]]) ** 2).sum(axis=1)
    return phi * np.exp(-d2 / sigma)


def build_graph(posterior_fg: np.ndarray, rgb: np.ndarray, spmap: SuperpixelMap | None,
                phi: float = 30.0, sigma: float = 400.0, xi: float = 150.0,
                psi: float = 5.0) -> TwoLayerGraph:
    """Assemble data costs and pairwise weights for one frame.

    With ``spmap=None`` only the pixel layer is built.
    """
    post = np.asarray(posterior_fg, dtype=np.float64)
    h, w = post.shape
    if np.asarray(rgb).shape[:2] != (h, w):
        raise ValueError("posterior map and frame differ in size")
    if spmap is not None and spmap.labels.shape != (h, w):
        raise ValueError("posterior map and superpixel map differ in size")
    flat = post.ravel()
    pixel_cost = np.stack([-np.log1p(-flat), -np.log(flat)], axis=1)
    edges = grid_edges(h, w)
    weights = contrast_weights(rgb, edges, phi, sigma)
    if spmap is None:
        membership = np.zeros(h * w, dtype=np.int64)
        sp_cost = np.zeros((0, 2))
        sp_edges = np.zeros((0, 2), dtype=np.int64)
    else:
        membership = spmap.labels.ravel().astype(np.int64)
        sp_cost = np.stack(
            [np.bincount(membership, weights=pixel_cost[:, c], minlength=spmap.count) for c in (0, 1)],
            axis=1,
        )
        sp_edges = spmap.adjacency.astype(np.int64)
    return TwoLayerGraph(h, w, pixel_cost, edges, weights, sp_cost, sp_edges, membership, xi, psi)


def energy(graph: TwoLayerGraph, pixel_labels, sp_labels=None) -> float:
    """Total energy of a labeling (data terms plus all Potts penalties)."""
    lp = np.asarray(pixel_labels, dtype=np.int64).ravel()
    ls = np.zeros(0, dtype=np.int64) if sp_labels is None else np.asarray(sp_labels, dtype=np.int64).ravel()
    if lp.size != graph.n_pixels or ls.size != graph.n_superpixels:
        raise ValueError("labeling does not cover every node")
    labels = np.concatenate([lp, ls])
    unary = graph.unary()
    total = unary[np.arange(labels.size), labels].sum()
    edges, weights = graph.potts_edges()
    if len(edges):
        total += weights[labels[edges[:, 0]] != labels[edges[:, 1]]].sum()
    return float(total)


@dataclass
class BPResult:
    pixel_labels: np.ndarray      # (H, W) uint8
    sp_labels: np.ndarray         # (S,) uint8
    iterations: int
    max_delta: float
    converged: bool
    # "all0" / "all1" when a constant labeling replaced a worse BP labeling
    fallback: str | None = None


def _as_vectors(diff: np.ndarray) -> np.ndarray:
    """Normalized 2-component messages from their ``m(1) - m(0)`` differences."""
    return np.stack([np.maximum(-diff, 0.0), np.maximum(diff, 0.0)], axis=1)


def min_sum_bp(unary: np.ndarray, edges: np.ndarray, weights: np.ndarray,
               max_iters: int = 50, tol: float = 1e-4, damping: float = 0.5,
               return_messages: bool = False):
    """Binary min-sum loopy BP on a Potts pairwise graph.

    Synchronous updates with damping; every message is normalized so its
    smaller component is 0, which makes it fully described by the
    difference ``m(1) - m(0)``. For a Potts edge of weight ``w`` the update
    of that difference is ``clip(h(1) - h(0), -w, w)``. Converges when, over
    all messages, the largest ``|new - old|_inf / (1 + |old|_inf)`` drops
    below ``tol``. Returns ``(labels, iterations, max_delta, converged)``
    (plus the final ``(2E, 2)`` message array if requested); ties go to
    label 0.
    """
    unary = np.asarray(unary, dtype=np.float64)
    n = unary.shape[0]
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    weights = np.asarray(weights, dtype=np.float64)
    m = len(edges)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    wt = np.concatenate([weights, weights])
    rev = np.concatenate([np.arange(m, 2 * m), np.arange(m)])
    data = unary[:, 1] - unary[:, 0]
    msg = np.zeros(2 * m)

    if m == 0:
        labels = (data < 0).astype(np.uint8)
        return (labels, 0, 0.0, True, np.zeros((0, 2))) if return_messages else (labels, 0, 0.0, True)
    iterations = 0
    delta = 0.0
    converged = False
    for iterations in range(1, max_iters + 1):
        belief = data + np.bincount(dst, weights=msg, minlength=n)
        new = np.clip(belief[src] - msg[rev], -wt, wt)
        new = damping * msg + (1.0 - damping) * new
        # inf-norm of the change between the 2-component normalized messages
        change = np.maximum(np.abs(np.maximum(-new, 0) - np.maximum(-msg, 0)),
                            np.abs(np.maximum(new, 0) - np.maximum(msg, 0)))
        delta = float((change / (1.0 + np.abs(msg))).max())
        msg = new
        if delta < tol:
            converged = True
            break
    belief = data + np.bincount(dst, weights=msg, minlength=n)
    labels = (belief < 0).astype(np.uint8)
    if return_messages:
        return labels, iterations, delta, converged, _as_vectors(msg)
    return labels, iterations, delta, converged


def loopy_bp(graph: TwoLayerGraph, max_iters: int = 50, tol: float = 1e-4,
             damping: float = 0.5, constant_guard: bool = False) -> BPResult:
    """Minimize the two-layer energy; the pixel layer is the output mask.

    Loopy BP can settle on a fixed point with stable domain walls whose
    energy exceeds that of a constant labeling. With ``constant_guard`` the
    all-0 or all-1 labeling is returned instead whenever it is strictly
    cheaper (reported in ``fallback``).
    """
    edges, weights = graph.potts_edges()
    labels, iters, delta, conv = min_sum_bp(graph.unary(), edges, weights, max_iters, tol, damping)
    p = graph.n_pixels
    fallback = None
    if constant_guard:
        best = energy(graph, labels[:p], labels[p:])
        for name, value in (("all0", 0), ("all1", 1)):
            const = np.full(graph.n_nodes, value, dtype=np.uint8)
            e = energy(graph, const[:p], const[p:])
            if e < best:
                best, labels, fallback = e, const, name
    return BPResult(labels[:p].reshape(graph.height, graph.width), labels[p:], iters, delta, conv, fallback)
