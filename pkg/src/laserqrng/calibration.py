"""Fit the voltage-variance model <V^2> = AQ*P + AC*P^2 + F to a power sweep."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core_model import NoiseFit
from .interferometer import voltage_variance

# Smallest acceptable ratio of singular values of the column-scaled design matrix.
RCOND = 1e-12


class CalibrationError(ValueError):
    pass


class ClampWarning(UserWarning):
    """A fitted coefficient came out negative and was set to zero."""


@dataclass(frozen=True)
class CalibrationSample:
    power: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.power) and self.power > 0):
            raise CalibrationError("power must be positive and finite")
        if not (math.isfinite(self.variance) and self.variance >= 0):
            raise CalibrationError("variance must be non-negative and finite")


@dataclass(frozen=True)
class CalibrationResult:
    fit: NoiseFit
    residual_rms: float
    clamped: tuple[str, ...] = ()
    n_samples: int = 0

    @property
    def warning(self) -> bool:
        return bool(self.clamped)


def load_calibration_csv(path: str | Path) -> list[CalibrationSample]:
    samples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["power", "variance"]:
            raise CalibrationError("line 1: expected header 'power,variance'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise CalibrationError(f"line {lineno}: expected 2 fields, got {len(row)}")
            values = []
            for name, cell in zip(("power", "variance"), row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CalibrationError(f"line {lineno}: non-numeric {name}") from None
            try:
                samples.append(CalibrationSample(*values))
            except CalibrationError as exc:
                raise CalibrationError(f"line {lineno}: {exc}") from None
    if not samples:
        raise CalibrationError("no samples")
    return samples


def fit_noise_model(samples: Sequence[CalibrationSample]) -> CalibrationResult:
    """Unweighted least squares for (AQ, AC, F).

    Solved through the SVD of the column-normalized design matrix [P, P^2, 1],
    which stays stable where the normal equations would not. Negative
    coefficients are clamped to zero; a ClampWarning is issued when the
    negative value is significant rather than round-off. Coefficients whose
    contribution is at round-off level are reported as exactly zero.
    """
    P = np.array([s.power for s in samples], dtype=float)
    y = np.array([s.variance for s in samples], dtype=float)
    if len(np.unique(P)) < 3:
        raise CalibrationError("underdetermined: need at least 3 distinct powers")
    X = np.column_stack([P, P**2, np.ones_like(P)])
    scale = np.linalg.norm(X, axis=0)
    Xs = X / scale
    coef_s, _, _, sv = np.linalg.lstsq(Xs, y, rcond=None)
    if sv[-1] < RCOND * sv[0]:
        raise CalibrationError("ill-conditioned sweep")
    coef = coef_s / scale

    # a coefficient is "significant" if its contribution exceeds round-off of y
    tol = 1e-9 * max(float(np.abs(y).max()), np.finfo(float).tiny)
    clamped = []
    names = ("AQ", "AC", "F")
    for j, name in enumerate(names):
        significant = abs(coef[j]) * scale[j] / math.sqrt(len(P)) > tol
        if coef[j] < 0 and significant:
            clamped.append(name)
        if coef[j] < 0 or not significant:
            coef[j] = 0.0
    if clamped:
        warnings.warn(
            f"negative fitted coefficient(s) clamped to 0: {', '.join(clamped)}",
            ClampWarning,
            stacklevel=2,
        )
    residual = y - X @ coef
    return CalibrationResult(
        fit=NoiseFit(*(float(c) for c in coef)),
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        clamped=tuple(clamped),
        n_samples=len(P),
    )


def synthetic_sweep(
    fit: NoiseFit,
    powers: Sequence[float],
    rel_noise: float = 0.0,
    rng: np.random.Generator | None = None,
) -> list[CalibrationSample]:
    """Samples from the variance model, optionally with multiplicative noise."""
    out = []
    for p in powers:
        v = voltage_variance(fit, p)
        if rel_noise:
            if rng is None:
                raise ValueError("rel_noise requires an rng")
            v *= 1.0 + rel_noise * rng.standard_normal()
        out.append(CalibrationSample(float(p), max(v, 0.0)))
    return out


def write_calibration_csv(path: str | Path, samples: Sequence[CalibrationSample]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["power", "variance"])
        for s in samples:
            writer.writerow([repr(s.power), repr(s.variance)])
