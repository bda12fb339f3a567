"""Delay-interferometer output voltage and its variance/SNR model."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_model import LaserParams, MeasurementChain, NoiseFit
from .phase_sim import DeltaPhiSeries, theoretical_delta_phi_variance


@dataclass(frozen=True)
class VoltageSeries:
    values: np.ndarray
    tau_s: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("voltage series contains non-finite values")
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return len(self.values)


def gain_factor(laser: LaserParams, chain: MeasurementChain) -> float:
    """Volts per radian, sqrt(A) * P."""
    return math.sqrt(chain.gain) * laser.power


def phase_to_voltage(
    series: DeltaPhiSeries,
    laser: LaserParams,
    chain: MeasurementChain,
    mode: str = "linear",
) -> VoltageSeries:
    """Map phase differences to detector voltages.

    ``linear`` uses V = sqrt(A)*P*dphi (the small-angle form); ``sine`` keeps
    the full interference term sqrt(A)*P*sin(dphi).
    """
    k = gain_factor(laser, chain)
    if mode == "linear":
        v = k * series.values
    elif mode == "sine":
        v = k * np.sin(series.values)
    else:
        raise ValueError(f"unknown mode {mode!r}; expected 'linear' or 'sine'")
    return VoltageSeries(values=np.asarray(v, dtype=float), tau_s=series.tau_s)


def voltage_variance(fit: NoiseFit, P: float) -> float:
    return fit.AQ * P + fit.AC * P**2 + fit.F


def snr_gamma(fit: NoiseFit, P: float) -> float:
    """Quantum-to-classical variance ratio AQ*P / (AC*P^2 + F)."""
    if P <= 0:
        raise ValueError("power must be positive")
    floor = fit.AC * P**2 + fit.F
    if floor <= 0:
        raise ValueError("classical noise floor is zero; γ undefined")
    return fit.AQ * P / floor


def optimal_power(fit: NoiseFit) -> float:
    """Power maximizing snr_gamma, sqrt(F/AC)."""
    if fit.AC <= 0 or fit.F <= 0:
        raise ValueError("γ is monotone in P; no interior optimum")
    return math.sqrt(fit.F / fit.AC)


def quantum_voltage_variance(total_variance: float, gamma: float) -> float:
    """Share of the voltage variance due to the quantum term, γ/(γ+1)*<V^2>."""
    if total_variance < 0 or gamma < 0:
        raise ValueError("total_variance and gamma must be non-negative")
    if math.isinf(gamma):
        return total_variance
    return gamma / (gamma + 1.0) * total_variance


def expected_voltage_variance(laser: LaserParams, chain: MeasurementChain) -> float:
    """Linear-mode voltage variance A*P^2*Var(dphi), including classical C."""
    return chain.gain * laser.power**2 * theoretical_delta_phi_variance(
        laser, chain.effective_delay
    )
