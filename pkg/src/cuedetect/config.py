"""Pipeline configuration: every tunable with its default, plus a flat
``key = value`` file format (``#`` starts a comment)."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    # background model
    n_samples: int = 50
    ltp_tau: float = 0.1
    ltp_nu: float = 5.0
    median_frames: int = 100
    fast_frames: int = 100
    fast_factor: int = 1
    slow_factor: int = 10
    # reinitialization monitor
    reinit_enabled: bool = True
    reinit_downscale: int = 4
    reinit_window: int = 30
    reinit_stride: int = 5
    reinit_significance: float = 30.0
    reinit_grid: int = 8
    reinit_check_every: int = 10
    reinit_mean_distance: float = 10.0
    reinit_changed_fraction: float = 0.5
    reinit_disorder: float = 2.65
    # features
    n_close: int = 3
    update_bv: float = 15.0
    update_cv: float = 15.0
    update_tv: float = 8.0
    # learning
    tau_bv: float = 50.0
    tau_cv: float = 20.0
    tau_tv: float = 8.0
    dilation: int = 3
    kde_bandwidth: float = 2.0
    kde_min_total: float = 1000.0
    forgetting: float = 1.0
    prior_init: float = 0.1
    prior_rate: float = 0.001
    prior_floor: float = 0.01
    prior_ceiling: float = 0.99
    warmup_frames: int = 100
    # MRF
    phi: float = 30.0
    sigma: float = 400.0
    xi: float = 150.0
    psi: float = 5.0
    bp_tol: float = 1e-4
    bp_max_iters: int = 50
    bp_damping: float = 0.5
    bp_constant_guard: bool = False
    # superpixels
    slic_size: int = 16
    slic_compactness: float = 10.0
    slic_iterations: int = 5
    # post-processing; 0 selects the resolution rule (25 or 50)
    min_area: int = 0
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        positive = [
            "n_samples", "median_frames", "fast_factor", "slow_factor", "reinit_downscale",
            "reinit_window", "reinit_stride", "reinit_grid", "reinit_check_every", "n_close",
            "tau_bv", "tau_cv", "tau_tv", "dilation", "kde_bandwidth", "sigma", "bp_tol",
            "bp_max_iters", "slic_size", "slic_iterations", "prior_rate",
        ]
        non_negative = [
            "ltp_tau", "ltp_nu", "fast_frames", "reinit_significance", "kde_min_total",
            "warmup_frames", "phi", "xi", "psi", "slic_compactness", "min_area",
            "update_bv", "update_cv", "update_tv", "seed",
        ]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in non_negative:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.n_close > self.n_samples:
            raise ConfigError("n_close cannot exceed n_samples")
        if not 0 < self.prior_floor <= self.prior_init <= self.prior_ceiling < 1:
            raise ConfigError("need 0 < prior_floor <= prior_init <= prior_ceiling < 1")
        if not 0 < self.forgetting <= 1:
            raise ConfigError("forgetting must lie in (0, 1]")
        if not 0 <= self.bp_damping < 1:
            raise ConfigError("bp_damping must lie in [0, 1)")
        if self.ltp_tau >= 1:
            raise ConfigError("ltp_tau must be below 1")

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        return replace(self, **kwargs)

    @property
    def thresholds(self):
        from .bayes import Thresholds

        return Thresholds(self.tau_bv, self.tau_cv, self.tau_tv)


def _parse_value(name: str, kind, text: str):
    text = text.strip()
    try:
        if kind is bool or kind == "bool":
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int or kind == "int":
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r} as {getattr(kind, '__name__', kind)}") from None


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    types = {f.name: f.type for f in fields(PipelineConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, types[key], value)
    return replace(base or PipelineConfig(), **values)


def load_config(path: str | Path) -> PipelineConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def dump_config(config: PipelineConfig) -> str:
    return "".join(f"{f.name} = {getattr(config, f.name)}\n" for f in fields(config))
