"""Phase-diffusion trajectories and interferometric phase-difference sampling.

The spontaneous-emission phase is integrated white noise, i.e. a Wiener
process with diffusion coefficient D = 4*pi^2/tau_c. Trajectories are built
from exact Gaussian increments, so the grid spacing introduces no
discretization error in the variance; it only fixes which times can be
sampled.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .core_model import LaserParams, MeasurementChain, SimulationConfig, steps_in


@dataclass(frozen=True)
class PhaseTrace:
    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    @property
    def duration(self) -> float:
        return self.dt * (len(self.values) - 1)


@dataclass(frozen=True)
class DeltaPhiSeries:
    tau_l: float
    tau_s: float
    values: np.ndarray
    includes_classical: bool = False

    def __post_init__(self):
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return len(self.values)


def trajectory_streams(seed: int, index: int = 0) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (phase, classical-noise) generators for one trajectory.

    Streams depend only on ``(seed, index)``, so trajectories can be generated
    in any order or in parallel and still agree with a serial run.
    """
    phase = np.random.SeedSequence(seed, spawn_key=(index, 0))
    classical = np.random.SeedSequence(seed, spawn_key=(index, 1))
    return np.random.default_rng(phase), np.random.default_rng(classical)


def simulate_phase_trajectory(
    laser: LaserParams,
    sim: SimulationConfig,
    index: int = 0,
    delay: float | None = None,
    rng: np.random.Generator | None = None,
) -> PhaseTrace:
    """Simulate the quantum phase phi_sp on a uniform grid.

    ``index`` selects the trajectory substream of ``sim.seed``; pass ``rng``
    to draw from an explicit generator instead. If ``delay`` is given the
    trajectory must be at least that long.
    """
    if delay is not None and sim.duration < delay:
        raise ValueError("trajectory shorter than delay")
    if rng is None:
        rng, _ = trajectory_streams(sim.seed, index)
    n = sim.n_steps
    increments = rng.normal(0.0, math.sqrt(laser.diffusion * sim.step_dt), size=n)
    values = np.empty(n + 1)
    values[0] = 0.0
    np.cumsum(increments, out=values[1:])
    return PhaseTrace(t0=0.0, dt=sim.step_dt, values=values)


def sample_phase_differences(
    trace: PhaseTrace,
    chain: MeasurementChain,
    laser: LaserParams,
    rng: np.random.Generator | None = None,
) -> DeltaPhiSeries:
    """Sample phi(t_k + tau_l + tau_r) - phi(t_k) at t_k = t0 + k*tau_s.

    Adds an i.i.d. N(0, C) classical draw per sample when the laser's
    classical variance C is non-zero; ``rng`` is then required. The number of
    samples is floor((duration - tau_l_eff) / tau_s).
    """
    try:
        lag = steps_in(chain.effective_delay, trace.dt)
        stride = steps_in(chain.sampling_interval, trace.dt)
    except ValueError as exc:
        raise ValueError(f"delay and sampling interval must be grid-commensurate: {exc}") from None
    n_steps = len(trace.values) - 1
    if n_steps < lag + stride:
        raise ValueError("trace shorter than delay + sampling interval")
    count = (n_steps - lag) // stride
    start = np.arange(count) * stride
    values = trace.values[start + lag] - trace.values[start]
    noisy = laser.classical_variance > 0
    if noisy:
        if rng is None:
            raise ValueError("classical noise requires an rng")
        values = values + rng.normal(0.0, math.sqrt(laser.classical_variance), size=count)
    return DeltaPhiSeries(
        tau_l=chain.delay,
        tau_s=chain.sampling_interval,
        values=values,
        includes_classical=noisy,
    )


def theoretical_delta_phi_variance(laser: LaserParams, tau_l: float) -> float:
    """Var(delta phi) = 4*pi^2*tau_l/tau_c + C."""
    if tau_l < 0:
        raise ValueError("tau_l must be non-negative")
    return laser.diffusion * tau_l + laser.classical_variance


def simulate_delta_phi(
    laser: LaserParams, chain: MeasurementChain, sim: SimulationConfig
) -> Iterator[DeltaPhiSeries]:
    """Yield one phase-difference series per configured trajectory."""
    for index in range(sim.trajectories):
        phase_rng, classical_rng = trajectory_streams(sim.seed, index)
        trace = simulate_phase_trajectory(
            laser, sim, delay=chain.effective_delay, rng=phase_rng
        )
        yield sample_phase_differences(trace, chain, laser, rng=classical_rng)


def write_trace_csv(path: str | Path, times: np.ndarray, values: np.ndarray, column: str) -> None:
    """Write a ``t,<column>`` CSV, one row per grid point."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", column])
        for t, v in zip(times.tolist(), values.tolist()):
            writer.writerow([repr(t), repr(v)])
