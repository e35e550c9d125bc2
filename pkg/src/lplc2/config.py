"""Model parameters and implementation knobs.

Defaults follow the published parameter table; knobs the model leaves open
(boundary policy, leak slope, gate epsilon, delay mode) carry explicit
defaults so runs are reproducible.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml

VARIANTS = ("multi", "single", "center")
BOUNDARIES = ("replicate", "zero")
DELAY_MODES = ("sum", "per_step")

# Thresholds matched to the motion magnitude this implementation produces on
# the built-in scenes. Local motion stays below ~9.2 by construction (tanh
# normalization bounds each correlator), so the table default t_a never fires.
CALIBRATED_THRESHOLDS = {"t_a": 0.78, "t_d": 100.0}


class ConfigError(ValueError):
    """Raised for invalid or unknown configuration entries."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ModelConfig:
    # lamina / medulla spatial pooling
    r_de: int = 5
    r_di: int = 11
    r_dc: int = 5
    sigma_e: float = 10.0
    sigma_i: float = 20.0
    sigma_c: float = 20.0
    epsilon: float = 0.2

    # correlator
    n_c: int = 5
    tau_1: float = 80.0
    tau_nc_start: float = 80.0
    tau_nc_end: float = 40.0
    beta: float = 1.5
    gamma_1: float = 0.9
    gamma_2: float = 0.5

    # attention fields
    r_af: int = 40
    t_a: float = 10.0
    t_d: float = 5000.0
    d_frames: int = 10
    frame_interval_ms: float = 1000.0 / 33.0

    # open knobs
    leak_slope: float = 0.1
    gate_epsilon: float = 1e-9
    # T4/T5 values at or below this count as zero before the fractional
    # exponents, whose slope is unbounded at zero
    power_floor: float = 1e-12
    max_afs: Optional[int] = None
    variant: str = "multi"
    boundary: str = "replicate"
    delay_mode: str = "sum"

    def __post_init__(self):
        _validate(self)
        if self.variant in ("single", "center") and self.max_afs is None:
            object.__setattr__(self, "max_afs", 1)

    @property
    def fps(self) -> float:
        return 1000.0 / self.frame_interval_ms

    def replace(self, **changes) -> "ModelConfig":
        unknown = set(changes) - FIELD_NAMES
        if unknown:
            name = sorted(unknown)[0]
            raise ConfigError(name, "unknown configuration key")
        if "variant" in changes and "max_afs" not in changes:
            # let the new variant pick its own cap
            changes["max_afs"] = None if changes["variant"] == "multi" else 1
        return dataclasses.replace(self, **changes)

    def with_fps(self, fps: float) -> "ModelConfig":
        if not fps > 0:
            raise ConfigError("fps", "must be > 0")
        return self.replace(frame_interval_ms=1000.0 / fps)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


FIELD_NAMES = frozenset(f.name for f in fields(ModelConfig))
_INT_FIELDS = {"r_de", "r_di", "r_dc", "n_c", "r_af", "d_frames"}


def _validate(c: ModelConfig) -> None:
    for name in _INT_FIELDS:
        v = getattr(c, name)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(name, f"must be an integer, got {v!r}")
    for f in fields(c):
        v = getattr(c, f.name)
        if isinstance(v, float) and not math.isfinite(v):
            raise ConfigError(f.name, "must be finite")

    for name in ("r_de", "r_di", "r_dc", "r_af"):
        if getattr(c, name) < 1:
            raise ConfigError(name, "radius must be >= 1")
    for name in ("sigma_e", "sigma_i", "sigma_c"):
        if not getattr(c, name) > 0:
            raise ConfigError(name, "sigma must be > 0")
    if c.r_di <= c.r_de:
        raise ConfigError("r_di", "inhibitory radius must exceed excitatory radius r_de")
    if not c.epsilon > 0:
        raise ConfigError("epsilon", "must be > 0")
    if c.beta < 0:
        raise ConfigError("beta", "must be >= 0")
    if c.n_c < 1:
        raise ConfigError("n_c", "must be >= 1")
    if not c.tau_1 > 0:
        raise ConfigError("tau_1", "must be > 0")
    if not c.tau_nc_end > 0:
        raise ConfigError("tau_nc_end", "must be > 0")
    if c.tau_nc_start < c.tau_nc_end:
        raise ConfigError("tau_nc_start", "must be >= tau_nc_end")
    if not c.gamma_1 > 0 or not c.gamma_2 > 0:
        raise ConfigError("gamma_1" if not c.gamma_1 > 0 else "gamma_2", "must be > 0")
    if not c.t_a > 0:
        raise ConfigError("t_a", "must be > 0")
    if not c.t_d > 0:
        raise ConfigError("t_d", "must be > 0")
    if c.d_frames < 1:
        raise ConfigError("d_frames", "must be >= 1")
    if not c.frame_interval_ms > 0:
        raise ConfigError("frame_interval_ms", "must be > 0")
    if c.leak_slope < 0:
        raise ConfigError("leak_slope", "must be >= 0")
    if c.gate_epsilon < 0:
        raise ConfigError("gate_epsilon", "must be >= 0")
    if c.power_floor < 0:
        raise ConfigError("power_floor", "must be >= 0")
    if c.variant not in VARIANTS:
        raise ConfigError("variant", f"must be one of {VARIANTS}")
    if c.boundary not in BOUNDARIES:
        raise ConfigError("boundary", f"must be one of {BOUNDARIES}")
    if c.delay_mode not in DELAY_MODES:
        raise ConfigError("delay_mode", f"must be one of {DELAY_MODES}")
    if c.max_afs is not None:
        if isinstance(c.max_afs, bool) or not isinstance(c.max_afs, int) or c.max_afs < 1:
            raise ConfigError("max_afs", "must be a positive integer or null")
        if c.variant in ("single", "center") and c.max_afs != 1:
            raise ConfigError("max_afs", f"variant {c.variant!r} requires max_afs = 1")


def _coerce(name: str, value: Any) -> Any:
    if name in _INT_FIELDS and isinstance(value, float) and value.is_integer():
        return int(value)
    if name not in _INT_FIELDS and name not in ("variant", "boundary", "delay_mode", "max_afs"):
        if isinstance(value, int) and not isinstance(value, bool):
            return float(value)
    return value


def load_config(
    source: Union[None, str, Path, Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ModelConfig:
    """Build a validated config from a document and/or key overrides.

    ``source`` may be a mapping, a path to a YAML/JSON document, or the text
    of one. Missing keys take the defaults; unknown keys raise ConfigError.
    """
    data: dict = {}
    if source is not None:
        data.update(source if isinstance(source, Mapping) else read_document(source))
    if overrides:
        data.update(overrides)

    for key in data:
        if key not in FIELD_NAMES:
            raise ConfigError(key, "unknown configuration key")
    kwargs = {k: _coerce(k, v) for k, v in data.items()}
    try:
        return ModelConfig(**kwargs)
    except TypeError as exc:  # e.g. comparing str with int
        raise ConfigError("<document>", str(exc)) from exc


def read_document(source: Union[str, Path]) -> dict:
    """Raw key/value mapping from a config path or text, without validation."""
    text = Path(source).read_text() if _is_path(source) else str(source)
    loaded = yaml.safe_load(text)
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigError("<document>", "config document must be a flat mapping")
    return loaded


def _is_path(source) -> bool:
    if isinstance(source, Path):
        return True
    if not source.strip():
        return False
    return "\n" not in source and (":" not in source or Path(source).is_file())


def parse_override(item: str) -> tuple:
    """Parse one ``key=value`` command-line override."""
    if "=" not in item:
        raise ConfigError(item, "override must look like key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    value = yaml.safe_load(raw) if raw.strip() else None
    return key, value


def dump_config(config: ModelConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)


def alpha_for_delay(tau_ms: float, frame_interval_ms: float) -> float:
    """Coefficient of a first-order low-pass with time constant ``tau_ms``."""
    return frame_interval_ms / (frame_interval_ms + tau_ms)


def step_delays(config: ModelConfig) -> list:
    """Per-correlation-step delays, linear from tau_nc_start to tau_nc_end."""
    n = config.n_c
    if n == 1:
        return [config.tau_nc_start]
    span = config.tau_nc_end - config.tau_nc_start
    return [config.tau_nc_start + (i - 1) / (n - 1) * span for i in range(1, n + 1)]
