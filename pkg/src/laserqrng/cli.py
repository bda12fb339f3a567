"""Command-line front end: ``simulate | calibrate | optimize | analyze``.

Exit codes: 0 success, 1 analysis produced FAIL verdicts, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .calibration import fit_noise_model, load_calibration_csv
from .core_model import (
    KEY_SECTION,
    Config,
    from_mapping,
    format_value,
    load_config,
    validate,
)
from .entropy import (
    default_bracket,
    lambda_param,
    min_entropy,
    optimize_delay,
    per_sample_randomness,
    speed_sweep,
)
from .interferometer import (
    expected_voltage_variance,
    optimal_power,
    phase_to_voltage,
    snr_gamma,
)
from .phase_sim import (
    DeltaPhiSeries,
    simulate_delta_phi,
    simulate_phase_trajectory,
    theoretical_delta_phi_variance,
    trajectory_streams,
    write_trace_csv,
)
from .quantizer import gaussian_bin_probabilities, pack_words, quantize, unpack_words, worst_case_offset
from .whitening_stats import autocorrelation, difference_series, run_battery, xor_adjacent

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def format_report(items: Iterable[tuple[str, Any]]) -> str:
    return "".join(f"{key}: {format_value(value)}\n" for key, value in items)


def emit(items: list[tuple[str, Any]], out: Path | None, name: str) -> None:
    text = format_report(items)
    sys.stdout.write(text)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)


def resolve_config(args: argparse.Namespace) -> Config:
    config = Config()
    if getattr(args, "config", None):
        config = load_config(args.config)
    overrides = {
        key: getattr(args, key) for key in KEY_SECTION if getattr(args, key, None) is not None
    }
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return validate(from_mapping(overrides, config))


def config_items(config: Config) -> list[tuple[str, Any]]:
    return [(f"config.{k}", v) for k, v in config.flat().items()]


def quantum_sigma(config: Config) -> float:
    """Standard deviation of the quantum part of the voltage."""
    laser, chain = config.laser, config.chain
    return laser.power * math.sqrt(chain.gain * laser.diffusion * chain.effective_delay)


def cmd_simulate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    laser, chain, adc, sim = config.laser, config.chain, config.adc, config.sim
    sigma_q = quantum_sigma(config)
    if args.worst_case_offset:
        adc = replace(adc, offset=worst_case_offset(sigma_q, adc))
        config = replace(config, adc=adc)
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)

    dphi = np.concatenate([s.values for s in simulate_delta_phi(laser, chain, sim)])
    series = DeltaPhiSeries(chain.delay, chain.sampling_interval, dphi,
                            includes_classical=laser.classical_variance > 0)
    volts = phase_to_voltage(series, laser, chain, config.mode)
    bins = quantize(volts, adc)
    data, valid_bits = pack_words(bins, adc.bits)
    (out / "bitstream.bin").write_bytes(data)

    if args.dump_traces:
        phase_rng, _ = trajectory_streams(sim.seed, 0)
        trace = simulate_phase_trajectory(laser, sim, rng=phase_rng)
        write_trace_csv(out / "phase_trace.csv", trace.times, trace.values, "phi")
        t = np.arange(len(dphi)) * chain.sampling_interval
        write_trace_csv(out / "delta_phi.csv", t, dphi, "dphi")
        write_trace_csv(out / "voltage.csv", t, volts.values, "v")

    dphi_theory = theoretical_delta_phi_variance(laser, chain.effective_delay)
    dphi_emp = float(np.var(dphi))
    v_theory = expected_voltage_variance(laser, chain)
    v_emp = float(np.var(volts.values))
    lam = lambda_param(adc.bin_width, laser.power, laser.coherence_time, chain.gain)
    r0_closed = per_sample_randomness(lam, chain.effective_delay, adc.bits)
    r0_exact = min_entropy(gaussian_bin_probabilities(sigma_q, adc))
    counts = np.bincount(bins, minlength=adc.n_bins)
    r0_empirical = -math.log2(counts.max() / len(bins))
    r1 = float(autocorrelation(dphi, 1)[1]) if len(dphi) > 2 else float("nan")

    items: list[tuple[str, Any]] = [("command", "simulate"), ("version", __version__)]
    items += config_items(config)
    items += [
        ("samples", len(dphi)),
        ("delta_phi_variance_empirical", dphi_emp),
        ("delta_phi_variance_theory", dphi_theory),
        ("delta_phi_variance_rel_error", dphi_emp / dphi_theory - 1.0),
        ("delta_phi_lag1_autocorrelation", r1),
        ("voltage_variance_empirical", v_emp),
        ("voltage_variance_theory", v_theory),
        ("sigma_quantum", sigma_q),
        ("bin_width", adc.bin_width),
        ("n_bins", adc.n_bins),
        ("lambda", lam),
        ("R0_closed_form", r0_closed),
        ("R0_bin_distribution", r0_exact),
        ("R0_empirical_histogram", r0_empirical),
        ("Rs_closed_form", r0_closed / chain.sampling_interval),
        ("bitstream_path", str(out / "bitstream.bin")),
        ("bitstream_words", len(bins)),
        ("bitstream_bits_per_word", adc.bits),
        ("bitstream_bytes", len(data)),
        ("bitstream_valid_bits_last_byte", valid_bits),
    ]
    emit(items, out, "report.txt")
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    result = fit_noise_model(load_calibration_csv(args.csv))
    fit = result.fit
    out = Path(args.out) if args.out else None
    items: list[tuple[str, Any]] = [
        ("command", "calibrate"),
        ("input", args.csv),
        ("samples", result.n_samples),
        ("AQ", fit.AQ),
        ("AC", fit.AC),
        ("F", fit.F),
        ("residual_rms", result.residual_rms),
        ("clamped", ",".join(result.clamped) or "none"),
    ]
    try:
        p_star = optimal_power(fit)
    except ValueError as exc:
        items.append(("optimal_power", f"undefined ({exc})"))
        p_star = None
    else:
        items += [("optimal_power", p_star), ("gamma_at_optimum", snr_gamma(fit, p_star))]
    emit(items, out, "calibration_report.txt")

    if out is not None and (fit.AC > 0 or fit.F > 0):
        centre = p_star or 1.0
        powers = np.geomspace(centre / 100, centre * 100, 201)
        with open(out / "gamma_curve.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["power", "gamma"])
            for p in powers:
                writer.writerow([repr(float(p)), repr(snr_gamma(fit, float(p)))])
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.lam is not None:
        lam = args.lam
        source = "given"
    else:
        lam = lambda_param(
            config.adc.bin_width, config.laser.power, config.laser.coherence_time, config.chain.gain
        )
        source = "config"
    cap = args.cap if args.cap is not None else float(config.adc.bits)
    bracket = tuple(args.bracket) if args.bracket else default_bracket(lam)
    tau_opt, rs_max = optimize_delay(lam, cap, bracket)
    out = Path(args.out) if args.out else None
    items: list[tuple[str, Any]] = [("command", "optimize")]
    if source == "config":
        items += config_items(config)
    items += [
        ("lambda", lam),
        ("lambda_source", source),
        ("cap_bits", cap),
        ("bracket_lo", bracket[0]),
        ("bracket_hi", bracket[1]),
        ("tau_opt", tau_opt),
        ("R0_at_tau_opt", per_sample_randomness(lam, tau_opt, cap)),
        ("Rs_max", rs_max),
    ]
    emit(items, out, "optimize_report.txt")
    if out is not None:
        rows = speed_sweep(lam, np.geomspace(bracket[0], bracket[1], 241), cap)
        with open(out / "speed_sweep.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tau_l", "R0", "Rs"])
            writer.writerows([[repr(float(x)) for x in row] for row in rows])
    return EXIT_OK


def read_series_csv(path: Path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise UsageError(f"{path}: empty file")
        try:
            return np.array([float(row[-1]) for row in reader if row], dtype=float)
        except ValueError as exc:
            raise UsageError(f"{path}: {exc}") from None


def cmd_analyze(args: argparse.Namespace) -> int:
    path = Path(args.path)
    if not path.is_file():
        raise UsageError(f"{path}: no such file")
    config = resolve_config(args)
    items: list[tuple[str, Any]] = [("command", "analyze"), ("input", str(path))]
    if path.suffix == ".csv":
        series = read_series_csv(path)
        kind = "series"
        if args.difference:
            series = difference_series(series)
    else:
        series = unpack_words(path.read_bytes(), config.adc.bits, args.words)
        kind = "bitstream"
        items.append(("bits_per_word", config.adc.bits))
        if args.xor:
            series = xor_adjacent(series)
    items += [("kind", kind), ("samples", len(series)), ("max_lag", args.max_lag)]
    results = run_battery(
        series,
        max_lag=args.max_lag,
        normality=(kind == "series" and args.normality),
        uniform_bins=(config.adc.n_bins if kind == "bitstream" and args.uniform else None),
    )
    n_fail = sum(not r.passed for r in results)
    items.append(("failures", n_fail))
    text = format_report(items) + "".join(r.line() + "\n" for r in results)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "analysis_report.txt").write_text(text)
    return EXIT_FAIL if n_fail else EXIT_OK


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, metavar="N", default=argparse.SUPPRESS)
    common.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS)

    overrides = argparse.ArgumentParser(add_help=False)
    group = overrides.add_argument_group("configuration overrides")
    for key in KEY_SECTION:
        if key == "seed":
            continue
        group.add_argument("--" + key.replace("_", "-"), dest=key, metavar="VALUE",
                           default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="laserqrng", parents=[common],
                                description="Laser phase-noise QRNG simulator and analyzer.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common, overrides],
                       help="Simulate phase noise through to a packed bitstream.")
    s.add_argument("--worst-case-offset", action="store_true",
                   help="Shift the ADC partition to center a bin on zero.")
    s.add_argument("--dump-traces", action="store_true",
                   help="Also write phase, phase-difference and voltage CSV traces.")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("calibrate", parents=[common],
                       help="Fit AQ, AC, F to a power,variance CSV sweep.")
    c.add_argument("csv")
    c.set_defaults(func=cmd_calibrate)

    o = sub.add_parser("optimize", parents=[common, overrides],
                       help="Find the delay maximizing generation speed.")
    o.add_argument("--lambda", dest="lam", type=_positive_float, default=None,
                   help="lambda in sqrt(s); derived from the configuration when omitted.")
    o.add_argument("--cap", type=_positive_float, default=None,
                   help="Cap on bits per sample (default: ADC bit depth).")
    o.add_argument("--bracket", type=_positive_float, nargs=2, metavar=("LO", "HI"))
    o.set_defaults(func=cmd_optimize)

    a = sub.add_parser("analyze", parents=[common, overrides],
                       help="Run the independence battery on a bitstream or series CSV.")
    a.add_argument("path")
    a.add_argument("--words", type=int, default=None,
                   help="Number of words in the bitstream (needed when bits < 8).")
    a.add_argument("--max-lag", type=int, default=8)
    a.add_argument("--xor", action="store_true", help="XOR adjacent words before testing.")
    a.add_argument("--difference", action="store_true",
                   help="Difference adjacent values of a series before testing.")
    a.add_argument("--normality", action="store_true", help="Add skewness/kurtosis checks.")
    a.add_argument("--uniform", action="store_true",
                   help="Add a chi-square test of word uniformity.")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("config", "seed", "out"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"laserqrng {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
