import pytest

from cuedetect.config import ConfigError, PipelineConfig, dump_config, load_config, parse_config


def test_defaults():
    c = PipelineConfig()
    assert (c.n_samples, c.n_close, c.phi, c.sigma, c.xi, c.psi) == (50, 3, 30, 400, 150, 5)
    assert (c.tau_bv, c.tau_cv, c.tau_tv) == (50, 20, 8)
    assert (c.update_bv, c.update_cv, c.update_tv) == (15, 15, 8)
    assert (c.slic_size, c.slic_compactness, c.slic_iterations) == (16, 10, 5)
    assert (c.prior_init, c.prior_rate, c.prior_floor, c.prior_ceiling) == (0.1, 0.001, 0.01, 0.99)
    assert (c.reinit_mean_distance, c.reinit_changed_fraction, c.reinit_disorder) == (10, 0.5, 2.65)
    assert (c.fast_factor, c.slow_factor, c.fast_frames, c.warmup_frames) == (1, 10, 100, 100)


def test_parse_and_round_trip(tmp_path):
    c = parse_config("# comment\nphi = 12.5\nseed = 7  # trailing\nreinit_enabled = no\n")
    assert c.phi == 12.5 and c.seed == 7 and c.reinit_enabled is False
    assert isinstance(c.seed, int)
    path = tmp_path / "c.cfg"
    path.write_text(dump_config(c))
    assert load_config(path) == c


@pytest.mark.parametrize("text,message", [
    ("bogus = 1", "unknown key 'bogus'"),
    ("phi = 1\nphi = 2", "duplicate key 'phi'"),
    ("phi", "expected 'key = value'"),
    ("n_samples = many", "n_samples"),
    ("n_samples = 0", "n_samples must be positive"),
    ("phi = -1", "phi must be non-negative"),
    ("prior_floor = 0.5", "prior_floor"),
    ("n_close = 60", "n_close"),
    ("bp_damping = 1", "bp_damping"),
])
def test_validation_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.cfg")


def test_overrides_validate():
    with pytest.raises(ConfigError):
        PipelineConfig().with_overrides(slic_size=0)
