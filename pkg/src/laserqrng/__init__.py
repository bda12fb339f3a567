"""Simulation and randomness analysis of laser phase-noise quantum random number generators."""

__version__ = "0.1.0"

from .core_model import (
    AdcParams,
    Config,
    LaserParams,
    MeasurementChain,
    NoiseFit,
    SimulationConfig,
    ValidationError,
    validate,
)

__all__ = [
    "AdcParams",
    "Config",
    "LaserParams",
    "MeasurementChain",
    "NoiseFit",
    "SimulationConfig",
    "ValidationError",
    "validate",
]
