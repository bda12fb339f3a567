"""Domain types, validation and the ``key = value`` configuration format.

Units are SI (seconds, volts, watts) by convention, but only ratios such as
``delay / coherence_time`` enter the physics, so any consistent set of
units works.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

MODES = ("linear", "sine")

# Minimum number of grid steps per delay and per sampling interval.
STEPS_PER_INTERVAL = 10


class ValidationError(ValueError):
    """A parameter violates one of its invariants."""

    def __init__(self, name: str, constraint: str):
        self.name = name
        self.constraint = constraint
        super().__init__(f"{name} {constraint}")


def _finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValidationError(name, "must be finite")


def _positive(name: str, value: float) -> None:
    _finite(name, value)
    if value <= 0:
        raise ValidationError(name, "must be positive")


def _non_negative(name: str, value: float) -> None:
    _finite(name, value)
    if value < 0:
        raise ValidationError(name, "must be non-negative")


@dataclass(frozen=True)
class LaserParams:
    """Source parameters.

    ``classical_variance`` is the classical phase-noise variance (rad^2)
    added to every sampled phase difference.
    """

    power: float = 1.0
    coherence_time: float = 1e-6
    classical_variance: float = 0.0

    def __post_init__(self):
        _positive("power", self.power)
        _positive("coherence_time", self.coherence_time)
        _non_negative("classical_variance", self.classical_variance)

    @property
    def diffusion(self) -> float:
        """Phase diffusion coefficient 4*pi^2/tau_c in rad^2 per second."""
        return 4.0 * math.pi**2 / self.coherence_time


@dataclass(frozen=True)
class MeasurementChain:
    delay: float = 5e-10
    sampling_interval: float = 5e-10
    gain: float = 1.0
    response_time: float = 0.0

    def __post_init__(self):
        _positive("delay", self.delay)
        _positive("sampling_interval", self.sampling_interval)
        _positive("gain", self.gain)
        _non_negative("response_time", self.response_time)
        if self.sampling_interval <= self.response_time:
            raise ValidationError("sampling_interval", "must exceed response_time")

    @property
    def effective_delay(self) -> float:
        """Delay seen by the detector once its response time is included."""
        return self.delay + self.response_time


@dataclass(frozen=True)
class NoiseFit:
    """Coefficients of <V^2> = AQ*P + AC*P^2 + F."""

    AQ: float
    AC: float
    F: float

    def __post_init__(self):
        for name in ("AQ", "AC", "F"):
            _non_negative(name, getattr(self, name))


@dataclass(frozen=True)
class AdcParams:
    bits: int = 8
    v_min: float = -0.6
    v_max: float = 0.6
    offset: float = 0.0

    def __post_init__(self):
        if isinstance(self.bits, bool) or not isinstance(self.bits, int) or self.bits < 1:
            raise ValidationError("bits", "must be a positive integer")
        if self.bits > 32:
            raise ValidationError("bits", "must be at most 32")
        _finite("v_min", self.v_min)
        _finite("v_max", self.v_max)
        _finite("offset", self.offset)
        if not self.v_min < self.v_max:
            raise ValidationError("v_max", "must exceed v_min")

    @property
    def n_bins(self) -> int:
        return 1 << self.bits

    @property
    def bin_width(self) -> float:
        return (self.v_max - self.v_min) / self.n_bins

    def edges(self):
        """All 2^b + 1 partition edges, offset applied."""
        return self.v_min + self.offset + self.bin_width * np.arange(self.n_bins + 1)


@dataclass(frozen=True)
class SimulationConfig:
    seed: int = 20141
    step_dt: float = 5e-11
    duration: float = 5.00005e-5
    trajectories: int = 1

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ValidationError("seed", "must be an unsigned integer")
        _positive("step_dt", self.step_dt)
        _positive("duration", self.duration)
        if isinstance(self.trajectories, bool) or not isinstance(self.trajectories, int) \
                or self.trajectories < 1:
            raise ValidationError("trajectories", "must be a positive integer")

    @property
    def n_steps(self) -> int:
        return steps_in(self.duration, self.step_dt, floor=True)


def steps_in(interval: float, dt: float, floor: bool = False) -> int:
    """Number of grid steps of width ``dt`` in ``interval``.

    With ``floor=False`` the interval must be an integer multiple of ``dt``
    (relative slack 1e-9) and a ValueError is raised otherwise.
    """
    ratio = interval / dt
    nearest = round(ratio)
    if abs(ratio - nearest) <= 1e-9 * max(1.0, abs(ratio)):
        return int(nearest)
    if floor:
        return int(math.floor(ratio))
    raise ValueError(f"interval {interval!r} is not an integer multiple of step {dt!r}")


@dataclass(frozen=True)
class Config:
    laser: LaserParams = field(default_factory=LaserParams)
    chain: MeasurementChain = field(default_factory=MeasurementChain)
    adc: AdcParams = field(default_factory=AdcParams)
    sim: SimulationConfig = field(default_factory=SimulationConfig)
    mode: str = "linear"

    def flat(self) -> dict[str, Any]:
        """Flat ``key -> value`` view, in config-file key order."""
        out: dict[str, Any] = {}
        for section in (self.laser, self.chain, self.adc, self.sim):
            for f in fields(section):
                out[f.name] = getattr(section, f.name)
        out["mode"] = self.mode
        return out


_SECTIONS = {
    "laser": LaserParams,
    "chain": MeasurementChain,
    "adc": AdcParams,
    "sim": SimulationConfig,
}
KEY_SECTION = {f.name: sec for sec, cls in _SECTIONS.items() for f in fields(cls)}
KEY_SECTION["mode"] = None
INT_KEYS = {"bits", "seed", "trajectories"}


def validate(config: Config) -> Config:
    """Check cross-field invariants and return the (unchanged) config.

    Field-local invariants are enforced when each part is constructed, so a
    config reaching this function only needs its cross-field rules checked.
    Idempotent.
    """
    laser, chain, sim = config.laser, config.chain, config.sim
    if config.mode not in MODES:
        raise ValidationError("mode", f"must be one of {', '.join(MODES)}")
    if laser.coherence_time <= chain.response_time:
        raise ValidationError("coherence_time", "must exceed response_time")
    finest = min(chain.delay, chain.sampling_interval) / STEPS_PER_INTERVAL
    if sim.step_dt > finest * (1 + 1e-9):
        raise ValidationError(
            "step_dt", f"must be at most min(delay, sampling_interval)/{STEPS_PER_INTERVAL}"
        )
    if sim.duration < chain.effective_delay + chain.sampling_interval:
        raise ValidationError("duration", "must cover delay + response_time + sampling_interval")
    return config


def _coerce(key: str, raw: Any) -> Any:
    if key == "mode":
        return str(raw).strip()
    if key in INT_KEYS:
        if isinstance(raw, int) and not isinstance(raw, bool):
            return raw
        text = str(raw).strip()
        try:
            return int(text)
        except ValueError:
            value = float(text)
            if not value.is_integer():
                raise ValidationError(key, "must be an integer") from None
            return int(value)
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ValidationError(key, f"must be a number, got {raw!r}") from None


def from_mapping(values: Mapping[str, Any], base: Config | None = None) -> Config:
    """Build a config from flat ``key -> value`` pairs layered over ``base``."""
    base = base or Config()
    unknown = sorted(set(values) - set(KEY_SECTION))
    if unknown:
        raise ValidationError(unknown[0], "is not a recognized configuration key")
    parts: dict[str, dict[str, Any]] = {name: {} for name in _SECTIONS}
    mode = base.mode
    for key, raw in values.items():
        value = _coerce(key, raw)
        if key == "mode":
            mode = value
        else:
            parts[KEY_SECTION[key]][key] = value
    return Config(
        laser=replace(base.laser, **parts["laser"]),
        chain=replace(base.chain, **parts["chain"]),
        adc=replace(base.adc, **parts["adc"]),
        sim=replace(base.sim, **parts["sim"]),
        mode=mode,
    )


def parse_config_text(text: str, base: Config | None = None) -> Config:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}", "is not of the form 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEY_SECTION:
            raise ValidationError(key, f"is not a recognized configuration key (line {lineno})")
        values[key] = value
    return from_mapping(values, base)


def load_config(path: str | Path, base: Config | None = None) -> Config:
    return parse_config_text(Path(path).read_text(), base)


def format_value(value: Any) -> str:
    # repr() of a float is the shortest string that round-trips exactly
    return repr(value) if isinstance(value, float) else str(value)


def dump_config(config: Config) -> str:
    return "".join(f"{key} = {format_value(v)}\n" for key, v in config.flat().items())
