from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Iterable

import yaml

from timeloc.errors import ConfigurationError, UnknownExperiment
from timeloc.utils import get_fields_metadata, get_section_field_names

GOLDEN_ALPHA = (math.sqrt(5) - 1) / 2
OUTPUT_ROOT_ENV_VAR = "TIMELOC_OUTPUT_ROOT"
TOP_LEVEL_FIELDS = ("experiment", "seed", "output_dir")
SECTIONS = ("physics", "numerics", "sweep")

EXPERIMENTS = ("fig1", "fig2", "sos", "levels", "eigenstate-compare", "born-vs-tm", "lattice-sweep", "custom", "gen-disorder")

# Applied on top of the field defaults, before any file or override.
PRESETS: dict[str, dict[str, Any]] = {
    "fig1": {"k0": 100.0, "V": 300.0, "energy": 500.0, "states": 8, "realizations": 5},
    "fig2": {"s": 100, "lam": 2e4, "k0": 100.0, "V": 10.0, "band": "lowest"},
    "sos": {"V": 20.0, "k0": 10.0},
    "levels": {"V": 20.0, "k0": 10.0},
    "eigenstate-compare": {"V": 20.0, "k0": 10.0},
    "born-vs-tm": {"energy": 8e3, "k0": 1e3, "V": 4e3},
    "lattice-sweep": {"s": 100, "lam": 2e4, "k0": 100.0, "V": 10.0, "realizations": 20},
    "custom": {},
    "gen-disorder": {},
}


def _physics(default: Any, help_text: str, reference_default: Any = None) -> Any:
    metadata = {"section": "physics", "help": help_text} | ({"reference_default": reference_default} if reference_default is not None else {})
    return field(default=default, metadata=metadata)


def _numerics(default: Any, help_text: str) -> Any:
    return field(default=default, metadata={"section": "numerics", "help": help_text})


@dataclass
class ExperimentConfig:  # pylint: disable=too-many-instance-attributes
    experiment: str = field(default="custom", metadata={"help": "Named pipeline to run"})
    seed: int = field(default=7, metadata={"help": "Master seed of every random stream"})
    output_dir: str | None = field(default=None, metadata={"help": "Run directory (defaults under $TIMELOC_OUTPUT_ROOT)"})

    omega: float = _physics(2000 - GOLDEN_ALPHA, "Drive frequency", 2000 - GOLDEN_ALPHA)
    alpha: float = _physics(GOLDEN_ALPHA, "Degeneracy-breaking momentum offset", GOLDEN_ALPHA)
    V: float = _physics(20.0, "Disorder strength", 20.0)
    lam: float = _physics(0.0, "Lattice drive amplitude (0 disables the lattice)", 2e4)
    s: int = _physics(100, "Lattice harmonic / number of sites", 100)
    k0: float = _physics(10.0, "Disorder correlation wavenumber", 10.0)
    mu: float = _physics(1.0, "Kinetic coefficient of the effective model")
    energy: float = _physics(8e3, "Energy above omega^2/2 (E tilde)", 8e3)
    band: str = _physics("lowest", "Tight-binding band: lowest or first-excited")

    cutoff: int | None = _numerics(None, "Drive harmonic cutoff K (default ceil(4 k0))")
    n_halfwidth: int | None = _numerics(None, "Plane-wave / Floquet momentum half-width")
    m_halfwidth: int | None = _numerics(None, "Floquet time-harmonic half-width")
    h: float | None = _numerics(None, "Transfer-matrix grid step (default min(zeta, de Broglie)/10)")
    L: float | None = _numerics(None, "Transfer-matrix line length (default 200 Born lengths)")
    realizations: int = _numerics(12, "Disorder realizations")
    states: int = _numerics(20, "Shell eigenstates analysed per realization")
    shell: float | None = _numerics(None, "Half-width of the energy shell around the target energy (default max(1, 5% of it))")
    levels: int = _numerics(8, "Lowest effective levels compared with quasienergies")
    cadence: int = _numerics(64, "Transfer-matrix renormalization cadence")
    steps_per_period: int | None = _numerics(None, "Integrator steps per drive period (default max(64, 8 K))")
    periods: int = _numerics(400, "Drive periods integrated for Poincare sections")
    trajectories: int = _numerics(8, "Initial conditions in the Poincare fan")
    grid_points: int = _numerics(1024, "Points of the ring grid used for densities")
    V_values: list[float] = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0], metadata={"section": "numerics", "help": "Disorder strengths of the level plot"})  # fmt: skip

    axis: str | None = field(default=None, metadata={"section": "sweep", "help": "Config field swept by `timeloc sweep`"})
    values: list[float] = field(default_factory=list, metadata={"section": "sweep", "help": "Values taken by the swept field"})

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise UnknownExperiment(f"Unknown experiment {self.experiment!r}, expected one of {', '.join(EXPERIMENTS)}")
        if self.band not in ("lowest", "first-excited"):
            raise ConfigurationError(f"band must be 'lowest' or 'first-excited', got {self.band!r}")
        if self.realizations < 1 or self.states < 1 or self.levels < 1:
            raise ConfigurationError("realizations, states and levels must be positive")
        if self.shell is not None and self.shell <= 0:
            raise ConfigurationError(f"The energy shell half-width must be positive, got {self.shell}")
        if self.axis is not None and self.axis not in numeric_field_names():
            raise ConfigurationError(f"Sweep axis {self.axis!r} is not a numeric config field")

    def resolved_output_dir(self) -> Path:
        if self.output_dir is not None:
            return Path(self.output_dir)
        return Path(os.environ.get(OUTPUT_ROOT_ENV_VAR, "runs")) / f"{self.experiment}-seed{self.seed}"

    def to_sections(self) -> dict[str, Any]:
        data: dict[str, Any] = {name: getattr(self, name) for name in TOP_LEVEL_FIELDS}
        for section in SECTIONS:
            data[section] = {name: getattr(self, name) for name in get_section_field_names(ExperimentConfig, section)}
        return data

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_sections(), sort_keys=False)


# ========================================================================================================


def numeric_field_names() -> list[str]:
    return [field_obj.name for field_obj in fields(ExperimentConfig) if field_obj.type in ("float", "int", "float | None", "int | None")]


def _coerce(name: str, value: Any) -> Any:
    field_type = {field_obj.name: field_obj.type for field_obj in fields(ExperimentConfig)}[name]
    if value is None:
        if "None" not in str(field_type):
            raise ConfigurationError(f"{name} cannot be empty")
        return None
    try:
        if str(field_type).startswith("float"):
            return float(value)
        if str(field_type).startswith("int"):
            if isinstance(value, float) and not value.is_integer():
                raise ConfigurationError(f"{name} must be an integer, got {value}")
            return int(value)
        if str(field_type).startswith("list"):
            return [float(item) for item in (value if isinstance(value, list) else [value])]
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"Cannot read {name}={value!r}: {exc}") from exc
    return str(value)


def flatten_sections(data: dict[str, Any]) -> dict[str, Any]:
    """Turns the sectioned YAML layout into field name -> value, rejecting unknown keys and deeper nesting."""
    known = get_fields_metadata(ExperimentConfig)
    flat: dict[str, Any] = {}
    for key, value in data.items():
        if key in SECTIONS:
            if not isinstance(value, dict):
                raise ConfigurationError(f"Section {key!r} must be a mapping")
            for name, item in value.items():
                if isinstance(item, dict):
                    raise ConfigurationError(f"Nested structure under {key}.{name} is not allowed")
                if known.get(name, {}).get("section") != key:
                    raise ConfigurationError(f"Unknown key {key}.{name}")
                flat[name] = item
        elif key in TOP_LEVEL_FIELDS:
            flat[key] = value
        else:
            raise ConfigurationError(f"Unknown top-level key {key!r}")
    return flat


def load_config_file(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as config_file:
            data = yaml.safe_load(config_file) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"Config file {path} is not valid YAML") from exc
    except OSError as exc:
        raise ConfigurationError(f"Cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {path} must contain a mapping")
    return flatten_sections(data)


def parse_override(text: str) -> tuple[str, Any]:
    """`key=value` or `section.key=value`; the value is read as YAML so lists and numbers keep their type."""
    if "=" not in text:
        raise ConfigurationError(f"Override {text!r} is not of the form key=value")
    key, raw_value = text.split("=", 1)
    name = key.strip().split(".")[-1]
    if name not in get_fields_metadata(ExperimentConfig):
        raise ConfigurationError(f"Unknown config key {key!r}")
    return name, yaml.safe_load(raw_value)


def apply_values(config: ExperimentConfig, values: dict[str, Any]) -> ExperimentConfig:
    return replace(config, **{name: _coerce(name, value) for name, value in values.items()})


def resolve_config(experiment: str | None = None, config_path: str | Path | None = None, overrides: Iterable[str] = (),
                   seed: int | None = None, output_dir: str | None = None) -> ExperimentConfig:  # fmt: skip
    """Defaults < experiment preset < config file < `key=value` overrides < explicit flags."""
    file_values = load_config_file(config_path) if config_path is not None else {}
    override_values = dict(parse_override(text) for text in overrides)
    name = experiment or override_values.get("experiment") or file_values.get("experiment") or "custom"
    if name not in PRESETS:
        raise UnknownExperiment(f"Unknown experiment {name!r}, expected one of {', '.join(EXPERIMENTS)}")
    config = apply_values(ExperimentConfig(), PRESETS[name])
    config = apply_values(config, file_values)
    config = apply_values(config, override_values)
    flags: dict[str, Any] = {"experiment": name}
    if seed is not None:
        flags["seed"] = seed
    if output_dir is not None:
        flags["output_dir"] = output_dir
    config = apply_values(config, flags)
    config.validate()
    return config
