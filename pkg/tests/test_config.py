import pytest

from src.config.settings import CONFIG_KEYS, ENV_PREFIX, PipelineConfig, load_settings
from src.core.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in CONFIG_KEYS:
        monkeypatch.delenv(ENV_PREFIX + key.upper(), raising=False)


def write_toml(tmp_path, text):
    path = tmp_path / "streetscore.toml"
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults():
    config = load_settings(use_env=False)
    assert config == PipelineConfig()
    assert config.buffer_radius == 22.5
    assert config.effective_cell_size == 45.0
    assert config.targets == ("safety", "walkability")
    assert config.to_dict()["stability_thresholds"][0] == 1.0


def test_layers_in_order(tmp_path, monkeypatch):
    path = write_toml(tmp_path, '[pipeline]\nbuffer_radius = 30.0\nnight_bins = 4\nworkers = 2\n')
    assert load_settings(path, use_env=False).buffer_radius == 30.0

    monkeypatch.setenv(ENV_PREFIX + "NIGHT_BINS", "5")
    monkeypatch.setenv(ENV_PREFIX + "STRICT", "yes")
    config = load_settings(path, overrides={"workers": "3", "buffer_radius": None})
    assert config.buffer_radius == 30.0
    assert config.night_bins == 5
    assert config.strict is True
    assert config.workers == 3


def test_top_level_toml_and_dash_keys(tmp_path):
    path = write_toml(tmp_path, 'stability-thresholds = [1, 5, 25]\ntargets = ["safety"]\n')
    config = load_settings(path, overrides={"reference-category": "none", "cell-size": "60"}, use_env=False)
    assert config.stability_thresholds == (1.0, 5.0, 25.0)
    assert config.targets == ("safety",)
    assert config.reference_category is None
    assert config.cell_size == 60.0


def test_string_lists_from_environment(monkeypatch):
    monkeypatch.setenv(ENV_PREFIX + "STABILITY_THRESHOLDS", "1, 10;100")
    assert load_settings().stability_thresholds == (1.0, 10.0, 100.0)


@pytest.mark.parametrize("overrides", [
    {"buffer_radius": "0"},
    {"night_confidence": "1.5"},
    {"cell_size": "10"},
    {"stability_thresholds": "10,1"},
    {"targets": "crime"},
    {"night_bins": "1"},
    {"workers": "0"},
    {"reference_category": "spaceport"},
    {"strict": "maybe"},
    {"seed": "1.5"},
    {"colour": "red"},
])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        load_settings(overrides=overrides, use_env=False)


def test_bad_config_files(tmp_path):
    with pytest.raises(ConfigError):
        load_settings(tmp_path / "missing.toml", use_env=False)
    with pytest.raises(ConfigError):
        load_settings(write_toml(tmp_path, "buffer_radius = [\n"), use_env=False)
    with pytest.raises(ConfigError) as info:
        load_settings(write_toml(tmp_path, "buffer_radius = 'wide'\n"), use_env=False)
    assert info.value.details["key"] == "buffer_radius"
    assert info.value.exit_code == 1
