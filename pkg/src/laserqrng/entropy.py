"""Min-entropy, worst-case randomness per sample, and generation speed.

At the operating point tau_s = tau_l the worst-case randomness per sample is

    R0 = -log2(2*Phi(lambda/sqrt(tau_l)) - 1),  lambda = a/(4*pi*P) * sqrt(tau_c/A)

and the generation speed is R_s = R0/tau_l. R0 grows without bound as
tau_l/lambda^2 grows, so it is capped at the ADC word size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc

from .quantizer import BinDistribution

LN2 = math.log(2.0)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class EntropyReport:
    lam: float
    tau_l: float
    R0: float
    Rs: float
    tau_opt: float
    Rs_max: float
    cap_bits: float

    def items(self) -> list[tuple[str, float]]:
        return [
            ("lambda", self.lam),
            ("tau_l", self.tau_l),
            ("R0", self.R0),
            ("Rs", self.Rs),
            ("tau_opt", self.tau_opt),
            ("Rs_max", self.Rs_max),
            ("cap_bits", self.cap_bits),
        ]


def min_entropy(dist: BinDistribution | np.ndarray) -> float:
    p = dist.probabilities if isinstance(dist, BinDistribution) else np.asarray(dist, dtype=float)
    if p.size == 0:
        raise ValueError("empty distribution")
    return float(-math.log2(p.max()))


def lambda_param(a: float, P: float, tau_c: float, A: float) -> float:
    """lambda = a/(4*pi*P) * sqrt(tau_c/A), in sqrt(seconds)."""
    for name, value in (("a", a), ("P", P), ("tau_c", tau_c), ("A", A)):
        if not value > 0:
            raise ValueError(f"{name} must be positive")
    return a / (4.0 * math.pi * P) * math.sqrt(tau_c / A)


def central_bin_entropy(z):
    """-log2(2*Phi(z) - 1), the min-entropy of a centered bin of half-width z*sigma.

    2*Phi(z) - 1 = erf(z/sqrt 2); for large z the complement erfc keeps the
    near-zero result accurate.
    """
    z = np.asarray(z, dtype=float)
    x = z / math.sqrt(2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = -np.log2(erf(x))
        large = -np.log1p(-erfc(x)) / LN2
    h = np.where(z < 1.0, small, large)
    return h[()] if h.ndim == 0 else h


def per_sample_randomness(lam, tau_l, cap_bits: float = math.inf):
    """Worst-case bits per sample, min(-log2(2*Phi(lam/sqrt(tau_l)) - 1), cap_bits)."""
    lam = np.asarray(lam, dtype=float)
    tau_l = np.asarray(tau_l, dtype=float)
    if np.any(lam <= 0) or np.any(tau_l <= 0):
        raise ValueError("lambda and tau_l must be positive")
    with np.errstate(over="ignore"):
        z = lam / np.sqrt(tau_l)
    r = np.minimum(central_bin_entropy(z), cap_bits)
    return float(r) if r.ndim == 0 else r


def generation_speed(lam, tau_l, cap_bits: float = math.inf):
    """Bits per second at tau_s = tau_l."""
    return per_sample_randomness(lam, tau_l, cap_bits) / np.asarray(tau_l, dtype=float)


def total_randomness(lam: float, tau_l: float, window: float, cap_bits: float = math.inf) -> float:
    return window * generation_speed(lam, tau_l, cap_bits)


def default_bracket(lam: float) -> tuple[float, float]:
    # tau_opt scales as lam^2; six decades around it is ample
    return 1e-3 * lam**2, 1e3 * lam**2


def _golden_max(f, lo: float, hi: float, rtol: float) -> float:
    """Golden-section maximization of f over log-spaced [lo, hi]."""
    a, b = math.log(lo), math.log(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    # width in log space approximates the relative width in tau
    while b - a > rtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(math.exp(d))
    return math.exp((a + b) / 2)


def optimize_delay(
    lam: float,
    cap_bits: float = math.inf,
    bracket: tuple[float, float] | None = None,
    rtol: float = 1e-6,
    scan_points: int = 65,
) -> tuple[float, float]:
    """Delay maximizing the generation speed, and the speed there.

    A coarse log-spaced scan checks that the bracket contains an interior
    maximum and narrows it to two scan cells; golden-section search then
    refines to relative tolerance ``rtol``.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    lo, hi = bracket if bracket is not None else default_bracket(lam)
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")

    def speed(tau: float) -> float:
        return float(generation_speed(lam, tau, cap_bits))

    grid = np.geomspace(lo, hi, scan_points)
    values = generation_speed(lam, grid, cap_bits)
    i = int(np.argmax(values))
    if i == 0 or i == scan_points - 1:
        raise ValueError("no interior maximum in bracket; expand bracket")
    tau = _golden_max(speed, grid[i - 1], grid[i + 1], rtol)
    return tau, speed(tau)


def photon_number_entropy_cap(N: int) -> float:
    """Most bits a photon-number measurement with at most N photons can give."""
    if isinstance(N, bool) or int(N) != N or N < 0:
        raise ValueError("N must be a non-negative integer")
    return math.log2(int(N) + 1)


def speed_sweep(lam: float, taus: np.ndarray, cap_bits: float = math.inf) -> np.ndarray:
    """Rows of (tau_l, R0, Rs) for plotting."""
    taus = np.asarray(taus, dtype=float)
    r0 = per_sample_randomness(lam, taus, cap_bits)
    return np.column_stack([taus, r0, r0 / taus])


def entropy_report(
    lam: float, tau_l: float, cap_bits: float = math.inf,
    bracket: tuple[float, float] | None = None,
) -> EntropyReport:
    tau_opt, rs_max = optimize_delay(lam, cap_bits, bracket)
    r0 = per_sample_randomness(lam, tau_l, cap_bits)
    return EntropyReport(
        lam=lam, tau_l=tau_l, R0=r0, Rs=r0 / tau_l,
        tau_opt=tau_opt, Rs_max=rs_max, cap_bits=cap_bits,
    )
