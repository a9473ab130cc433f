"""Tests for settings and run configuration."""

import pytest
from pydantic import ValidationError

from src.bodies import box, ellipsoid, minkowski_combine
from src.bodies.nets import default_net_size, direction_net
from src.checks.verdicts import VerdictPolicy
from src.core.errors import ConfigurationError
from src.models.run_config import RunConfig
from src.models.settings import Settings


def test_settings_defaults():
    """Test that settings have proper default values."""
    settings = Settings()
    assert settings.seed is None
    assert settings.samples == 1_000_000
    assert settings.workers == 1
    assert settings.sigma_nodes == 4096
    assert settings.debug is False
    assert settings.log_level == "INFO"


def test_settings_from_env(monkeypatch):
    """Test that settings are loaded from GBM_* environment variables."""
    monkeypatch.setenv("GBM_SEED", "42")
    monkeypatch.setenv("GBM_SAMPLES", "5000")
    monkeypatch.setenv("GBM_PDE_H", "0.01")

    settings = Settings()
    assert settings.seed == 42
    assert settings.samples == 5000
    assert settings.pde_h == 0.01
    assert {"seed", "samples", "pde_h"} <= settings.model_fields_set


def test_settings_case_insensitive(monkeypatch):
    monkeypatch.setenv("gbm_workers", "4")
    assert Settings().workers == 4


def test_settings_from_dotenv(tmp_path):
    (tmp_path / ".env").write_text("GBM_SIGMA_NODES=2048\n")
    assert Settings().sigma_nodes == 2048


def test_settings_validation():
    """Out-of-range values and an inverted verdict band are rejected."""
    with pytest.raises(ValidationError):
        Settings(sigma_nodes=10)
    with pytest.raises(ValidationError):
        Settings(holds_sigmas=6.0, violated_sigmas=5.0)
    settings = Settings(holds_sigmas=2.0, violated_sigmas=4.0, exact_tolerance=1e-6)
    policy = VerdictPolicy.from_settings(settings)
    assert policy == VerdictPolicy(holds_sigmas=2.0, violated_sigmas=4.0, exact_tolerance=1e-6)


def test_net_sizes_by_dimension():
    settings = Settings()
    assert settings.net_size(2) == settings.net_size_2d
    assert settings.net_size(3) == settings.net_size_3d
    assert settings.net_size(7) == settings.net_size_high
    assert default_net_size(1) == 2
    assert default_net_size(3) == settings.net_size_3d


def test_net_sizes_follow_the_environment(monkeypatch):
    monkeypatch.setenv("GBM_NET_SIZE_2D", "512")
    assert default_net_size(2) == 512
    assert len(direction_net(2)) == 512
    combo = minkowski_combine(0.5, ellipsoid(2.0, 1.0), box(1.0, 1.0))
    assert combo.net_size == 512
    assert "net_size" not in combo.params()

    monkeypatch.setenv("GBM_NET_SIZE_2D", "8")
    with pytest.raises(ConfigurationError):
        default_net_size(2)


def test_log_level_is_validated(monkeypatch):
    monkeypatch.setenv("GBM_LOG_LEVEL", "warning")
    assert Settings().log_level == "WARNING"
    with pytest.raises(ValidationError):
        Settings(log_level="LOUD")


def test_run_file_loading(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("command: measure\nseed: 3\nsamples: 1000\nformat: csv\n")
    run = RunConfig.from_yaml(path)
    assert run.command == "measure"
    assert run.seed == 3
    assert run.format == "csv"


@pytest.mark.parametrize(
    "text",
    ["seed: [1, 2", "- 1\n- 2\n", "colour: red\n", "nodes: 10\n"],
)
def test_invalid_run_files(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        RunConfig.from_yaml(path)


def test_missing_run_file_is_an_os_error(tmp_path):
    with pytest.raises(OSError):
        RunConfig.from_yaml(tmp_path / "absent.yaml")


def test_precedence_flag_env_file_default(monkeypatch):
    """A flag beats GBM_* which beats the run file which beats the default."""
    run = RunConfig(seed=5, samples=100)
    resolved = run.resolve(Settings())
    assert (resolved.seed, resolved.samples, resolved.workers) == (5, 100, 1)
    assert resolved.nodes == 4096

    monkeypatch.setenv("GBM_SEED", "9")
    assert run.resolve(Settings()).seed == 9
    assert run.resolve(Settings()).samples == 100
    assert run.resolve(Settings(), seed=11).seed == 11


def test_resolve_validates_the_merge():
    with pytest.raises(ConfigurationError):
        RunConfig().resolve(Settings(), nodes=10)


def test_require_seed():
    with pytest.raises(ConfigurationError):
        RunConfig().resolve(Settings()).require_seed()
    assert RunConfig(seed=0).require_seed() == 0
