"""Per-frame change-detection pipeline.

features -> training-data accumulation -> posteriors -> superpixels ->
two-layer BP -> post-processing -> prior and background-model updates ->
reinitialization check. The first ``warmup_frames`` frames (and any frame
while a density is still in its uniform warm-up state) are labeled by the
confident-foreground rule instead of Bayes + MRF.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import features
from .background import ReinitMonitor, init_model, temporal_median
from .bayes import ClassConditionalModel, PriorMap
from .config import PipelineConfig
from .ltp import ltp_image
from .mrf import build_graph, energy, loopy_bp
from .postprocess import area_threshold, post_process
from .superpixels import slic
from .video_io import Frame

log = logging.getLogger(__name__)

STAGES = ("likelihood", "posterior", "pixel_mrf", "two_layer_mrf", "final")


@dataclass
class FrameResult:
    index: int
    mask: np.ndarray
    warmup: bool
    reinitialized: bool
    record: dict = field(default_factory=dict)
    stages: dict[str, np.ndarray] = field(default_factory=dict)


class Detector:
    """Stateful detector for one video.

    Call :meth:`start` with the first frame and the temporal median of the
    opening frames, then :meth:`process` every frame in order (the first
    frame included).
    """

    def __init__(self, config: PipelineConfig = PipelineConfig(), ablation: bool = False):
        self.config = config
        self.ablation = ablation
        self.model = None
        self.monitor = None
        self.learner = None
        self.priors = None
        self.min_area = None

    def start(self, first_rgb: np.ndarray, median_rgb: np.ndarray) -> None:
        c = self.config
        rng = np.random.default_rng(c.seed)
        self.model = init_model(
            first_rgb, median_rgb, rng, n_samples=c.n_samples, tau=c.ltp_tau, nu=c.ltp_nu,
            fast_frames=c.fast_frames, fast_factor=c.fast_factor, slow_factor=c.slow_factor,
        )
        self.monitor = ReinitMonitor(
            factor=c.reinit_downscale, window=c.reinit_window, stride=c.reinit_stride,
            significance=c.reinit_significance, grid=c.reinit_grid,
            thresholds=(c.reinit_mean_distance, c.reinit_changed_fraction, c.reinit_disorder),
            check_every=c.reinit_check_every,
        )
        self.learner = ClassConditionalModel(
            c.thresholds, bandwidth=c.kde_bandwidth, min_total=c.kde_min_total,
            forgetting=c.forgetting, dilation=c.dilation,
        )
        h, w = np.asarray(first_rgb).shape[:2]
        self.priors = PriorMap((h, w), c.prior_init, c.prior_rate, c.prior_floor, c.prior_ceiling)
        self.min_area = c.min_area or area_threshold(w, h)

    def process(self, frame: Frame | np.ndarray, index: int | None = None) -> FrameResult:
        if self.model is None:
            raise RuntimeError("Detector.start() must be called before process()")
        if not isinstance(frame, Frame):
            frame = Frame(np.asarray(frame), index=index or self.model.frame_counter + 1)
        c = self.config
        model = self.model
        if frame.rgb.shape[:2] != model.shape:
            raise ValueError(f"frame {frame.index} is {frame.rgb.shape[:2]}, model is {model.shape}")
        rgb = frame.rgb
        t0 = time.perf_counter()
        model.advance()
        codes = ltp_image(frame.gray, c.ltp_tau, c.ltp_nu)
        t1 = time.perf_counter()
        fm = features.extract(rgb, codes, model, c.n_close)
        self.learner.accumulate(fm)
        warm = model.frame_counter <= c.warmup_frames or not self.learner.ready
        stages: dict[str, np.ndarray] = {}
        record: dict = {"frame": frame.index, "warmup": warm}
        post = None
        if not warm:
            post = self.learner.posterior(fm, self.priors.values)
        t2 = time.perf_counter()
        if warm:
            raw = self.learner.confident_foreground(fm)
            record.update(bp_iterations=0, bp_delta=0.0, bp_converged=None, bp_fallback=None, energy=None)
        else:
            spmap = slic(rgb, c.slic_size, c.slic_compactness, c.slic_iterations)
            graph = build_graph(post, rgb, spmap, c.phi, c.sigma, c.xi, c.psi)
            result = loopy_bp(graph, c.bp_max_iters, c.bp_tol, c.bp_damping, c.bp_constant_guard)
            raw = result.pixel_labels.astype(bool)
            record.update(
                bp_iterations=result.iterations, bp_delta=result.max_delta,
                bp_converged=result.converged, bp_fallback=result.fallback, superpixels=spmap.count,
                energy=energy(graph, result.pixel_labels, result.sp_labels),
            )
            if self.ablation:
                stages.update(self._ablation_masks(fm, post, rgb))
                stages["two_layer_mrf"] = raw.copy()
        final = post_process(raw, self.min_area)
        if stages:
            stages["final"] = final
        t3 = time.perf_counter()
        self.priors.update(final)
        candidates = features.criterion1(fm.bv, fm.cv, fm.tv, (c.update_bv, c.update_cv, c.update_tv))
        model.update(candidates | ~final, rgb, codes)
        fired = False
        disparity = None
        if c.reinit_enabled:
            self.monitor.observe(model.frame_counter, rgb)
            fired, disparity = self.monitor.check(model)
            if fired:
                model.reinitialize(rgb, codes)
                log.info("frame %d: background model reinitialized %s", frame.index, disparity)
        t4 = time.perf_counter()
        record.update(
            reinit=fired,
            disp=None if disparity is None else list(disparity.as_tuple()),
            subsampling=model.subsampling_factor,
            timings={
                "background": (t1 - t0) + (t4 - t3),
                "features_learning": t2 - t1,
                "labeling": t3 - t2,
                "total": t4 - t0,
            },
        )
        return FrameResult(frame.index, final, warm, fired, record, stages)

    def _ablation_masks(self, fm, post, rgb) -> dict[str, np.ndarray]:
        c = self.config
        likelihood = self.learner.posterior(fm, np.full(post.shape, 0.5))
        pixel_graph = build_graph(post, rgb, None, c.phi, c.sigma)
        pixel_bp = loopy_bp(pixel_graph, c.bp_max_iters, c.bp_tol, c.bp_damping, c.bp_constant_guard)
        return {
            "likelihood": likelihood > 0.5,
            "posterior": post > 0.5,
            "pixel_mrf": pixel_bp.pixel_labels.astype(bool),
        }


def run(frames: Iterable[Frame | np.ndarray], config: PipelineConfig = PipelineConfig(),
        ablation: bool = False) -> Iterator[FrameResult]:
    """Process a whole sequence, yielding one result per frame.

    The opening ``median_frames`` frames are buffered to build the temporal
    median used for initialization.
    """
    it = iter(frames)
    head = [f if isinstance(f, Frame) else Frame(np.asarray(f), index=i + 1)
            for i, f in enumerate(itertools.islice(it, config.median_frames))]
    if not head:
        return
    detector = Detector(config, ablation)
    detector.start(head[0].rgb, temporal_median([f.rgb for f in head]))
    counter = len(head)
    for frame in itertools.chain(head, it):
        if not isinstance(frame, Frame):
            counter += 1
            frame = Frame(np.asarray(frame), index=counter)
        yield detector.process(frame)
