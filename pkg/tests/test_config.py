import math

import pytest

from timeloc.config import (
    EXPERIMENTS, GOLDEN_ALPHA, OUTPUT_ROOT_ENV_VAR, PRESETS, ExperimentConfig, flatten_sections, load_config_file, numeric_field_names,
    parse_override, resolve_config,
)  # fmt: skip
from timeloc.errors import ConfigurationError, UnknownExperiment
from timeloc.utils import get_reference_defaults, get_section_field_names


class TestExperimentConfig:
    def test_defaults(self) -> None:
        config = resolve_config()
        assert config.experiment == "custom"
        assert config.seed == 7
        assert config.omega == pytest.approx(2000 - GOLDEN_ALPHA)
        assert config.alpha == pytest.approx((math.sqrt(5) - 1) / 2)

    def test_every_experiment_has_a_preset(self) -> None:
        assert set(PRESETS) == set(EXPERIMENTS)

    def test_preset_applies(self) -> None:
        config = resolve_config("fig1")
        assert (config.k0, config.V, config.energy, config.states) == (100.0, 300.0, 500.0, 8)

    def test_precedence(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        path = tmp_path / "config.yaml"
        path.write_text("experiment: sos\nseed: 3\nphysics:\n  V: 5\n  k0: 4\n", encoding="utf-8")
        config = resolve_config(config_path=path, overrides=["physics.V=6"], seed=11)
        assert config.experiment == "sos"
        assert config.V == 6.0
        assert config.k0 == 4.0
        assert config.seed == 11

    def test_explicit_experiment_beats_the_file(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        path = tmp_path / "config.yaml"
        path.write_text("experiment: sos\n", encoding="utf-8")
        assert resolve_config("levels", config_path=path).experiment == "levels"

    def test_yaml_echo_reloads(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        config = resolve_config("born-vs-tm", overrides=["numerics.V_values=[1, 2]", "sweep.axis=V"])
        path = tmp_path / "echo.yaml"
        path.write_text(config.to_yaml(), encoding="utf-8")
        reloaded = resolve_config(config_path=path)
        assert reloaded.to_sections() == config.to_sections()

    def test_sections(self) -> None:
        sections = resolve_config().to_sections()
        assert set(sections) == {"experiment", "seed", "output_dir", "physics", "numerics", "sweep"}
        assert "V" in sections["physics"]
        assert "cadence" in sections["numerics"]
        assert get_section_field_names(ExperimentConfig, "sweep") == ["axis", "values"]

    def test_reference_defaults(self) -> None:
        defaults = get_reference_defaults(ExperimentConfig)
        assert defaults["lam"] == 2e4
        assert "mu" not in defaults

    def test_output_root_from_environment(self, monkeypatch, tmp_path) -> None:  # type: ignore[no-untyped-def]
        monkeypatch.setenv(OUTPUT_ROOT_ENV_VAR, str(tmp_path))
        assert resolve_config("sos", seed=4).resolved_output_dir() == tmp_path / "sos-seed4"

    def test_numeric_fields(self) -> None:
        names = numeric_field_names()
        assert {"V", "k0", "omega", "cutoff", "realizations"} <= set(names)
        assert "band" not in names
        assert "V_values" not in names


class TestConfigErrors:
    def test_unknown_experiment(self) -> None:
        with pytest.raises(UnknownExperiment):
            resolve_config("fig9")

    def test_unknown_key(self) -> None:
        with pytest.raises(ConfigurationError):
            flatten_sections({"physics": {"omega_prime": 1.0}})
        with pytest.raises(ConfigurationError):
            flatten_sections({"colour": "blue"})

    def test_key_in_the_wrong_section(self) -> None:
        with pytest.raises(ConfigurationError):
            flatten_sections({"numerics": {"V": 1.0}})

    def test_nested_values(self) -> None:
        with pytest.raises(ConfigurationError):
            flatten_sections({"physics": {"V": {"value": 1.0}}})

    def test_bad_override(self) -> None:
        with pytest.raises(ConfigurationError):
            parse_override("physics.V")
        with pytest.raises(ConfigurationError):
            parse_override("physics.W=3")
        assert parse_override("physics.V=10") == ("V", 10)

    def test_type_errors(self) -> None:
        with pytest.raises(ConfigurationError):
            resolve_config(overrides=["numerics.states=2.5"])
        with pytest.raises(ConfigurationError):
            resolve_config(overrides=["physics.V=abc"])
        with pytest.raises(ConfigurationError):
            resolve_config(overrides=["physics.V=null"])

    def test_invalid_values(self) -> None:
        with pytest.raises(ConfigurationError):
            resolve_config(overrides=["physics.band=third"])
        with pytest.raises(ConfigurationError):
            resolve_config(overrides=["numerics.realizations=0"])
        with pytest.raises(ConfigurationError):
            resolve_config(overrides=["numerics.shell=0"])
        assert resolve_config(overrides=["numerics.shell=3"]).shell == 3.0
        with pytest.raises(ConfigurationError):
            resolve_config(overrides=["sweep.axis=band"])

    def test_bad_files(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        with pytest.raises(ConfigurationError):
            load_config_file(tmp_path / "missing.yaml")
        broken = tmp_path / "broken.yaml"
        broken.write_text("physics: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_config_file(broken)
        listing = tmp_path / "list.yaml"
        listing.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_config_file(listing)
