"""Decorrelation of overlapped samples and the statistical checks used on them.

Two decorrelation routes exist and are kept separate on purpose:
``difference_series`` works on the real-valued phase differences, while
``xor_whiten``/``xor_adjacent`` work on the digitized words. They are not the
same operation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name}: statistic={self.statistic:.6g} threshold={self.threshold:.6g} verdict={verdict}"


@dataclass(frozen=True)
class NormalityResult:
    skewness: float
    excess_kurtosis: float
    passed: bool


def difference_series(raw) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or len(raw) < 2:
        raise ValueError("need at least 2 samples to difference")
    return np.diff(raw)


def xor_whiten(bits_a, bits_b) -> np.ndarray:
    """Element-wise exclusive OR of two equal-length bit or word sequences."""
    a = np.asarray(bits_a)
    b = np.asarray(bits_b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return np.bitwise_xor(a.astype(np.int64), b.astype(np.int64))


def xor_adjacent(words) -> np.ndarray:
    """XOR every digitized word with its successor."""
    words = np.asarray(words)
    if len(words) < 2:
        raise ValueError("need at least 2 words")
    return xor_whiten(words[1:], words[:-1])


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Biased normalized autocorrelation r(0..max_lag); |r(m)| <= 1."""
    x = np.asarray(series, dtype=float)
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    if len(x) <= max_lag + 1:
        raise ValueError("series too short for requested lag")
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0 or not math.isfinite(denom):
        raise ValueError("degenerate series")
    n = len(x)
    return np.array([np.dot(x[: n - m], x[m:]) / denom for m in range(max_lag + 1)])


def bit_plane_autocorrelation(words, bits: int, lag: int = 1) -> np.ndarray:
    """Lag-``lag`` autocorrelation across samples of each bit position, MSB first.

    Constant bit planes (e.g. an unused MSB) report 0.
    """
    words = np.asarray(words, dtype=np.int64)
    out = np.zeros(bits)
    for i, shift in enumerate(range(bits - 1, -1, -1)):
        plane = (words >> shift) & 1
        if np.ptp(plane) == 0:
            continue
        out[i] = autocorrelation(plane, lag)[lag]
    return out


def chi_square_uniformity(bins, bin_count: int) -> tuple[float, int]:
    """Pearson statistic of bin counts against the uniform distribution."""
    bins = np.asarray(bins, dtype=np.int64)
    if bin_count < 2:
        raise ValueError("bin_count must be at least 2")
    if bins.size and (bins.min() < 0 or bins.max() >= bin_count):
        raise ValueError("bin index out of range")
    if bins.size < 5 * bin_count:
        raise ValueError("need at least 5 samples per bin")
    counts = np.bincount(bins, minlength=bin_count)
    expected = bins.size / bin_count
    return float(np.sum((counts - expected) ** 2) / expected), bin_count - 1


def chi_square_goodness_of_fit(bins, probabilities, min_expected: float = 5.0) -> tuple[float, int]:
    """Pearson statistic of bin counts against arbitrary probabilities.

    Adjacent bins are pooled, left to right, until each pooled cell expects at
    least ``min_expected`` counts; the last cell absorbs any remainder.
    """
    p = np.asarray(probabilities, dtype=float)
    bins = np.asarray(bins, dtype=np.int64)
    n = bins.size
    counts = np.bincount(bins, minlength=len(p))
    if len(counts) > len(p):
        raise ValueError("bin index out of range")
    obs, exp = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(counts, p * n):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs.append(o_acc)
            exp.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if not exp:
            raise ValueError("too few samples for a chi-square test")
        obs[-1] += o_acc
        exp[-1] += e_acc
    obs_a, exp_a = np.array(obs), np.array(exp)
    if len(exp_a) < 2:
        raise ValueError("too few cells after pooling")
    return float(np.sum((obs_a - exp_a) ** 2 / exp_a)), len(exp_a) - 1


def normality_check(series) -> NormalityResult:
    """Moment test: |skew| < 4*sqrt(6/N) and |excess kurtosis| < 4*sqrt(24/N)."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 100:
        raise ValueError("need at least 100 samples")
    if np.ptp(x) == 0:
        raise ValueError("degenerate series")
    skew = float(stats.skew(x))
    kurt = float(stats.kurtosis(x))
    ok = abs(skew) < 4 * math.sqrt(6 / n) and abs(kurt) < 4 * math.sqrt(24 / n)
    return NormalityResult(skew, kurt, ok)


def autocorrelation_tests(series, max_lag: int = 8, sigmas: float = 3.0) -> list[CheckResult]:
    r = autocorrelation(series, max_lag)
    threshold = sigmas / math.sqrt(len(series))
    return [
        CheckResult(f"autocorrelation_lag{m}", float(r[m]), threshold, abs(r[m]) < threshold)
        for m in range(1, max_lag + 1)
    ]


def run_battery(
    series,
    max_lag: int = 8,
    normality: bool = False,
    uniform_bins: int | None = None,
) -> list[CheckResult]:
    """Independence battery, plus optional normality and uniformity checks."""
    results = autocorrelation_tests(series, max_lag)
    if normality:
        res = normality_check(series)
        n = len(series)
        results.append(CheckResult("skewness", res.skewness, 4 * math.sqrt(6 / n),
                                  abs(res.skewness) < 4 * math.sqrt(6 / n)))
        results.append(CheckResult("excess_kurtosis", res.excess_kurtosis, 4 * math.sqrt(24 / n),
                                  abs(res.excess_kurtosis) < 4 * math.sqrt(24 / n)))
    if uniform_bins is not None:
        stat, dof = chi_square_uniformity(series, uniform_bins)
        crit = float(stats.chi2.ppf(0.99, dof))
        results.append(CheckResult("chi_square_uniformity", stat, crit, stat < crit))
    return results
