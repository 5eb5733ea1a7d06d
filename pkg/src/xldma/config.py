"""Experiment configuration: defaults, TOML loading, validation.

An empty config file reproduces the reference simulation protocol at desk
scale: 28 GHz carrier, half-wave spacing, 128 elements per strip, 4 strips,
20 pilots, 3 paths with cosines on [-1, 1] and ranges on [5, 100] m, SNR
defined as the inverse noise variance, a 2N-angle by 20-range estimation
dictionary, and an optimized DMA measurement design.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .geometry import SPEED_OF_LIGHT, ArrayGeometry

ESTIMATOR_NAMES = ("el_az_joint", "az_independent", "el_az_decoupled",
                   "el_az_decoupled_og", "oracle_ls")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    # array and carrier
    carrier_hz: float = 28e9
    num_strips: int = 4
    elems_per_strip: int = 128
    spacing: float | None = None          # None selects half-wave
    # pilots, paths, noise
    num_pilots: int = 20
    num_paths: int = 3
    snr_db: tuple = (-20, -16, -12, -8, -4, 0, 4, 8, 12)
    trials: int = 200
    seed: int = 1
    truth_model: str = "spherical"
    range_bounds: tuple = (5.0, 100.0)
    allow_nonphysical_cosines: bool = False
    # dictionaries
    az_angle_count: int | None = None     # None selects 2N
    az_range_count: int = 20
    joint_atoms: str = "oblong"
    memory_budget: int = 4 * 1024 ** 3
    # estimators
    estimators: tuple = ESTIMATOR_NAMES
    og_iters: int = 5
    el_search_points: int = 1024          # 0 selects the 2M dictionary grid
    el_refine: bool = True
    # measurement design
    design_mode: str = "dma_optimized"
    design_path: str | None = None        # load a saved design instead
    mmo_power_draws: int = 100
    cd_sweeps: int = 20
    cd_tol: float = 1e-8
    # experiment-specific knobs
    eval_el_cos: float = 0.25             # model-error / beam-gain source
    eval_az_cos: float = 0.25
    eval_range: float = 3.0
    gain_range_bounds: tuple = (1.0, 100.0)
    gain_range_points: int = 50
    timing_elems: tuple = (32, 64, 128, 256)
    timing_trials: int = 20
    timing_repeats: int = 3
    coherence_modes: tuple = ("dma_optimized", "dma_random",
                              "phased_optimized", "phased_random", "gaussian")
    coherence_seeds: int = 50
    # execution
    threads: int = 1
    experiment_id: str = "xl-dma"

    def __post_init__(self):
        if self.num_strips < 1 or self.elems_per_strip < 1:
            raise ConfigError("array dimensions must be positive")
        if self.num_pilots < 1 or self.num_paths < 1 or self.trials < 1:
            raise ConfigError("pilots, paths, and trials must be positive")
        unknown = set(self.estimators) - set(ESTIMATOR_NAMES)
        if unknown:
            raise ConfigError(f"unknown estimator names {sorted(unknown)}; "
                              f"choose from {ESTIMATOR_NAMES}")
        if self.truth_model not in ("spherical", "taylor2", "oblong", "planar"):
            raise ConfigError(f"unknown truth model {self.truth_model!r}")
        from .mmo import DESIGN_MODES
        if self.design_mode not in DESIGN_MODES:
            raise ConfigError(f"unknown design mode {self.design_mode!r}; "
                              f"choose from {DESIGN_MODES}")
        for mode in self.coherence_modes:
            if mode not in DESIGN_MODES:
                raise ConfigError(f"unknown coherence design mode {mode!r}")
        lo, hi = self.range_bounds
        if not 0 < lo < hi:
            raise ConfigError("range bounds must satisfy 0 < min < max")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    def geometry(self, elems_per_strip: int | None = None) -> ArrayGeometry:
        n = self.elems_per_strip if elems_per_strip is None else elems_per_strip
        d = self.wavelength / 2 if self.spacing is None else self.spacing
        return ArrayGeometry(self.num_strips, n, d, self.wavelength)

    def replace(self, **overrides) -> "ExperimentConfig":
        return dataclasses.replace(self, **overrides)


def _coerce(name: str, value, default):
    if isinstance(default, tuple) or (default is None and name == "snr_db"):
        return tuple(value)
    return value


def load_config(path: str | Path | None, **overrides) -> ExperimentConfig:
    """Load a TOML config file; missing file fields fall back to defaults.

    Keyword overrides (from CLI flags) win over the file. Unknown keys are a
    configuration error rather than a silent ignore.
    """
    data: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except FileNotFoundError as err:
            raise ConfigError(f"config file not found: {path}") from err
        except tomllib.TOMLDecodeError as err:
            raise ConfigError(f"config file {path} is not valid TOML: {err}") from err
    flat = {}
    for key, value in data.items():
        if isinstance(value, dict):           # nested tables flatten by key
            for sub, subval in value.items():
                flat[f"{key}_{sub}"] = subval
        else:
            flat[key] = value
    flat.update({k: v for k, v in overrides.items() if v is not None})
    valid = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(flat) - set(valid)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {name: _coerce(name, value, valid[name].default)
              for name, value in flat.items()}
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as err:
        raise ConfigError(str(err)) from err
