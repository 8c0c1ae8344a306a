"""Multi-cue change detection for video.

Color and texture cues are measured against a sample-based background model,
turned into foreground posteriors by online Bayesian learning and labeled
with a pixel/superpixel MRF. CDnet-style scoring is included.
"""

from .config import ConfigError, PipelineConfig, load_config, parse_config
from .evaluation import Confusion, MetricsReport, aggregate, report
from .pipeline import Detector, FrameResult, run
from .video_io import Frame, SequenceError, load_sequence

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Confusion",
    "Detector",
    "Frame",
    "FrameResult",
    "MetricsReport",
    "PipelineConfig",
    "SequenceError",
    "aggregate",
    "load_config",
    "load_sequence",
    "parse_config",
    "report",
    "run",
    "__version__",
]
