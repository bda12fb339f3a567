"""Finite-resolution ADC model.

Bins are half-open and left-closed, ``[edge_k, edge_k+1)``, with the two
outermost bins absorbing everything outside the range. This keeps the
sampled histogram and the analytic bin distribution consistent, and the
probabilities sum to exactly one.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .core_model import AdcParams
from .interferometer import VoltageSeries


@dataclass(frozen=True)
class BinDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = self.probabilities
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("empty distribution")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        p.setflags(write=False)

    @property
    def max_probability(self) -> float:
        return float(self.probabilities.max())


def quantize(series: VoltageSeries | np.ndarray, adc: AdcParams) -> np.ndarray:
    """Bin index of every voltage; out-of-range values saturate."""
    v = series.values if isinstance(series, VoltageSeries) else np.asarray(series, dtype=float)
    k = np.floor((v - adc.v_min - adc.offset) / adc.bin_width)
    return np.clip(k, 0, adc.n_bins - 1).astype(np.int64)


def gaussian_bin_probabilities(sigma_Q: float, adc: AdcParams) -> BinDistribution:
    """Probability of each ADC bin for a zero-mean Gaussian voltage."""
    if sigma_Q < 0:
        raise ValueError("sigma_Q must be non-negative")
    if sigma_Q == 0:
        p = np.zeros(adc.n_bins)
        p[quantize(np.zeros(1), adc)[0]] = 1.0
        return BinDistribution(p)
    inner = adc.edges()[1:-1] / sigma_Q
    cdf = np.concatenate(([0.0], ndtr(inner), [1.0]))
    return BinDistribution(np.diff(cdf))


def worst_case_offset(sigma_Q: float, adc: AdcParams) -> float:
    """Offset in [0, a) that centers a bin on the Gaussian mean.

    With edges at +-a/2 the central bin holds the largest possible mass,
    which minimizes the min-entropy. The result does not depend on sigma_Q
    for a zero-mean voltage.
    """
    if sigma_Q <= 0:
        raise ValueError("sigma_Q must be positive")
    a = adc.bin_width
    return float((-(adc.v_min + a / 2)) % a)


def with_worst_case_offset(sigma_Q: float, adc: AdcParams) -> AdcParams:
    return replace(adc, offset=worst_case_offset(sigma_Q, adc))


def pack_words(bins: np.ndarray, bits: int) -> tuple[bytes, int]:
    """Pack b-bit words big-endian, MSB first, into bytes.

    Returns the packed bytes and the number of valid bits in the final byte
    (8 when the stream ends on a byte boundary).
    """
    bins = np.asarray(bins, dtype=np.int64)
    if bins.size and (bins.min() < 0 or bins.max() >= 1 << bits):
        raise ValueError(f"bin index out of range for {bits}-bit words")
    shifts = np.arange(bits - 1, -1, -1, dtype=np.int64)
    bitarr = ((bins[:, None] >> shifts) & 1).astype(np.uint8).ravel()
    total = bitarr.size
    valid = total % 8 or (8 if total else 0)
    return np.packbits(bitarr).tobytes(), valid


def unpack_words(data: bytes, bits: int, count: int | None = None) -> np.ndarray:
    """Inverse of :func:`pack_words`.

    Without ``count`` every complete word is returned; for ``bits < 8`` this
    can include a word made entirely of padding, so pass ``count`` when known.
    """
    bitarr = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    available = len(bitarr) // bits
    if count is None:
        count = available
    elif count > available:
        raise ValueError(f"stream holds {available} words of {bits} bits, {count} requested")
    word_bits = bitarr[: count * bits].reshape(count, bits).astype(np.int64)
    weights = 1 << np.arange(bits - 1, -1, -1, dtype=np.int64)
    return word_bits @ weights
