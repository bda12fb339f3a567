import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc, erfinv

from laserqrng.core_model import AdcParams
from laserqrng.entropy import (
    central_bin_entropy,
    entropy_report,
    generation_speed,
    lambda_param,
    min_entropy,
    optimize_delay,
    per_sample_randomness,
    photon_number_entropy_cap,
    speed_sweep,
    total_randomness,
)
from laserqrng.quantizer import gaussian_bin_probabilities, with_worst_case_offset

# high-precision references (mpmath, 30 digits)
R0_AT_Z1 = 0.550698548602282423
H_WORST_3BIT = 1.38486653429098968
TAU_OPT_LAMBDA1 = 0.880825620778243423
RS_MAX_LAMBDA1 = 0.553246740213578624


def test_min_entropy_examples():
    assert min_entropy(np.full(8, 1 / 8)) == 3.0
    assert min_entropy(np.array([0.0, 1.0, 0.0])) == 0.0
    with pytest.raises(ValueError):
        min_entropy(np.array([]))


def test_min_entropy_worst_case_three_bit():
    sigma = 1.0
    adc = with_worst_case_offset(sigma, AdcParams(bits=3, v_min=-4.0, v_max=4.0))
    assert min_entropy(gaussian_bin_probabilities(sigma, adc)) == pytest.approx(H_WORST_3BIT, abs=1e-10)
    assert H_WORST_3BIT == pytest.approx(1.3850, abs=2e-4)  # quoted to 4 places


def test_lambda_param():
    P, A, tau_c = 1.3, 2.0, 1e-6
    a = 4 * math.pi * P * math.sqrt(A / tau_c)
    assert lambda_param(a, P, tau_c, A) == pytest.approx(1.0, rel=1e-14)
    assert lambda_param(2 * a, P, tau_c, A) == pytest.approx(2.0, rel=1e-14)
    assert lambda_param(a, 2 * P, tau_c, A) == pytest.approx(0.5, rel=1e-14)
    # mpmath: 0.0078125/(4 pi) * 1e-3
    assert lambda_param(0.0078125, 1.0, 1e-6, 1.0) == pytest.approx(6.21698996452716e-7, rel=1e-13)
    with pytest.raises(ValueError):
        lambda_param(0.0, 1.0, 1.0, 1.0)


def test_per_sample_randomness_examples():
    assert per_sample_randomness(1.0, 1.0) == pytest.approx(R0_AT_Z1, rel=1e-13)
    assert per_sample_randomness(1e3, 1e-6) == pytest.approx(0.0, abs=1e-300)
    assert per_sample_randomness(1e-9, 1.0, cap_bits=8) == 8.0
    assert per_sample_randomness(1e-300, 1.0, cap_bits=8) == 8.0


def test_central_bin_entropy_precision_across_branch():
    # both branches must agree near the switch point
    z = np.array([1 - 1e-12, 1 + 1e-12])
    h = central_bin_entropy(z)
    assert h[0] == pytest.approx(h[1], rel=1e-10)
    # far tail: -log2(1 - erfc(z/sqrt2)) ~ erfc(z/sqrt2)/ln2
    assert central_bin_entropy(10.0) == pytest.approx(erfc(10 / math.sqrt(2)) / math.log(2), rel=1e-10)
    assert central_bin_entropy(10.0) > 0


def test_generation_speed_examples():
    assert generation_speed(1.0, 1.0) == pytest.approx(R0_AT_Z1, rel=1e-13)
    assert generation_speed(1.0, 0.88) == pytest.approx(0.553, abs=5e-4)
    assert total_randomness(1.0, 1.0, window=10.0) == pytest.approx(10 * R0_AT_Z1, rel=1e-13)


def test_generation_speed_scaling_law():
    rng = np.random.default_rng(7)
    for lam, tau in zip(rng.uniform(0.1, 10, 10), rng.uniform(0.01, 100, 10)):
        lhs = generation_speed(lam, tau)
        rhs = generation_speed(1.0, tau / lam**2) / lam**2
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_optimize_delay_lambda_one():
    tau, rs = optimize_delay(1.0)
    assert tau == pytest.approx(0.88, abs=0.01)
    assert tau == pytest.approx(TAU_OPT_LAMBDA1, rel=1e-6)
    assert rs == pytest.approx(RS_MAX_LAMBDA1, rel=1e-12)


def test_optimize_delay_scaling():
    tau1, _ = optimize_delay(1.0)
    tau2, _ = optimize_delay(2.0)
    assert tau2 == pytest.approx(4 * tau1, rel=2e-6)


def test_optimize_delay_bad_bracket():
    with pytest.raises(ValueError, match="expand bracket"):
        optimize_delay(1.0, bracket=(5.0, 10.0))
    with pytest.raises(ValueError, match="expand bracket"):
        optimize_delay(1.0, bracket=(1e-3, 0.1))
    with pytest.raises(ValueError):
        optimize_delay(1.0, bracket=(2.0, 1.0))


def test_cap_above_optimal_r0_does_not_move_optimum():
    # R0 at the uncapped optimum is about 0.487 bits, so a 1-bit cap never binds there
    lam = 1e-4
    tau, _ = optimize_delay(lam, cap_bits=1.0)
    assert tau == pytest.approx(TAU_OPT_LAMBDA1 * lam**2, rel=2e-6)


def test_binding_cap_puts_optimum_at_cap_boundary():
    lam, cap = 1e-4, 0.25
    # boundary where the uncapped R0 reaches the cap: erf(z/sqrt2) = 2^-cap
    z_star = math.sqrt(2) * erfinv(2.0**-cap)
    tau_star = (lam / z_star) ** 2
    tau, rs = optimize_delay(lam, cap_bits=cap)
    assert tau == pytest.approx(tau_star, rel=1e-5)
    assert rs == pytest.approx(cap / tau_star, rel=1e-5)
    grid = np.geomspace(1e-3 * lam**2, 1e3 * lam**2, 200_001)
    assert rs >= generation_speed(lam, grid, cap).max() * (1 - 1e-9)


def test_photon_number_cap():
    assert photon_number_entropy_cap(0) == 0.0
    assert photon_number_entropy_cap(255) == 8.0
    assert photon_number_entropy_cap(10**6) == pytest.approx(19.9315700120184936, rel=1e-14)
    with pytest.raises(ValueError):
        photon_number_entropy_cap(-1)
    with pytest.raises(ValueError):
        photon_number_entropy_cap(2.5)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1.01, 10))
def test_monotonicity(lam, tau, k):
    r = per_sample_randomness(lam, tau)
    if 0 < r < math.inf:
        assert per_sample_randomness(lam, tau * k) >= r
        assert per_sample_randomness(lam * k, tau) <= r


def test_strict_monotonicity_on_grid():
    taus = np.geomspace(1e-2, 1e2, 400)
    assert np.all(np.diff(per_sample_randomness(1.0, taus)) > 0)
    lams = np.geomspace(1e-1, 1e1, 400)
    assert np.all(np.diff(per_sample_randomness(lams, 1.0)) < 0)


def test_unimodal_with_single_sign_change():
    taus = np.geomspace(1e-4, 1e4, 4001)
    slope = np.diff(generation_speed(1.0, taus))
    signs = np.sign(slope[slope != 0])
    assert np.count_nonzero(np.diff(signs)) == 1


def test_speed_limits_at_both_ends():
    assert generation_speed(1.0, 1e-3) < 1e-100
    assert generation_speed(1.0, 1e8) < 1e-6
    assert generation_speed(1.0, 1e12) < generation_speed(1.0, 1e8)


def test_sweep_and_report():
    rows = speed_sweep(1.0, np.array([0.5, 1.0]))
    assert rows.shape == (2, 3)
    assert rows[1, 1] == pytest.approx(R0_AT_Z1, rel=1e-13)
    report = entropy_report(1.0, 1.0, cap_bits=8)
    assert report.Rs == pytest.approx(report.R0 / 1.0)
    assert report.tau_opt == pytest.approx(TAU_OPT_LAMBDA1, rel=1e-6)
    assert 0 <= report.R0 <= 8
    assert dict(report.items())["lambda"] == 1.0


@pytest.mark.parametrize("lam, tau", [(1.0, 1.0), (0.3, 2.0), (2.0, 0.1), (1e-3, 1e-5)])
def test_two_paths_to_r0_agree(lam, tau):
    P, A, tau_c = 1.0, 1.0, 1.0
    a = lam * 4 * math.pi * P * math.sqrt(A / tau_c)
    sigma_q = 2 * math.pi * P * math.sqrt(A * tau / tau_c)
    half = 1 << 11  # 12-bit ADC, range far beyond 4 sigma
    adc = with_worst_case_offset(sigma_q, AdcParams(bits=12, v_min=-half * a, v_max=half * a))
    assert adc.v_max >= 4 * sigma_q
    exact = min_entropy(gaussian_bin_probabilities(sigma_q, adc))
    assert per_sample_randomness(lam, tau) == pytest.approx(exact, abs=1e-4)
