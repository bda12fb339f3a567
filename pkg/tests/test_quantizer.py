from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from laserqrng.core_model import AdcParams
from laserqrng.entropy import min_entropy
from laserqrng.interferometer import VoltageSeries
from laserqrng.quantizer import (
    BinDistribution,
    gaussian_bin_probabilities,
    pack_words,
    quantize,
    unpack_words,
    with_worst_case_offset,
    worst_case_offset,
)
from laserqrng.whitening_stats import chi_square_goodness_of_fit

ADC3 = AdcParams(bits=3, v_min=-1.0, v_max=1.0)


def test_boundary_and_saturation_bins():
    v = VoltageSeries(np.array([-1.0, 0.999, 0.0, 5.0, -7.0, 0.25 - 1e-12, 0.25]), tau_s=1.0)
    assert quantize(v, ADC3).tolist() == [0, 7, 4, 7, 0, 4, 5]


def test_offset_shifts_edges():
    adc = AdcParams(bits=3, v_min=-1.0, v_max=1.0, offset=0.125)
    assert quantize(np.array([0.1, 0.13]), adc).tolist() == [3, 4]


def test_wide_gaussian_mass_goes_to_edge_bins():
    p = gaussian_bin_probabilities(1e6, ADC3).probabilities
    assert p[0] + p[-1] > 1 - 1e-6
    assert p[1:-1].sum() < 1e-6


@pytest.mark.parametrize("sigma", [0.01, 0.5, 1.0, 30.0])
def test_two_bins_split_evenly(sigma):
    a = 0.3
    p = gaussian_bin_probabilities(sigma, AdcParams(bits=1, v_min=-a, v_max=a)).probabilities
    assert p == pytest.approx([0.5, 0.5], abs=1e-15)


def test_centered_bin_probability_against_quadrature():
    sigma = 0.7
    adc = AdcParams(bits=3, v_min=-4 * sigma, v_max=4 * sigma)  # a = sigma
    adc = with_worst_case_offset(sigma, adc)
    p = gaussian_bin_probabilities(sigma, adc)
    quad, _ = integrate.quad(lambda v: stats.norm.pdf(v, scale=sigma), -sigma / 2, sigma / 2)
    assert p.max_probability == pytest.approx(quad, abs=1e-12)
    assert p.max_probability == pytest.approx(0.382924922548026207, abs=1e-12)


def test_zero_sigma_is_point_mass():
    p = gaussian_bin_probabilities(0.0, ADC3).probabilities
    assert p[4] == 1.0 and p.sum() == 1.0


def test_distribution_sums_to_one():
    for sigma in (1e-3, 0.1, 1.0, 10.0):
        p = gaussian_bin_probabilities(sigma, AdcParams(bits=8, offset=0.0013)).probabilities
        assert abs(p.sum() - 1) <= 1e-12
        assert np.all(p >= 0)


def test_bin_distribution_validation():
    with pytest.raises(ValueError):
        BinDistribution(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        BinDistribution(np.array([]))


def test_worst_case_offset_symmetric_even():
    assert worst_case_offset(0.3, ADC3) == pytest.approx(ADC3.bin_width / 2, rel=1e-15)


def test_worst_case_offset_dominates_random_offsets():
    sigma = 0.25
    adc = AdcParams(bits=3, v_min=-1.0, v_max=1.0)
    worst = gaussian_bin_probabilities(sigma, with_worst_case_offset(sigma, adc)).max_probability
    rng = np.random.default_rng(0)
    for s in rng.uniform(-adc.bin_width, adc.bin_width, 1000):
        p = gaussian_bin_probabilities(sigma, replace(adc, offset=s)).max_probability
        assert p <= worst + 1e-15


def test_shift_periodicity():
    adc = AdcParams(bits=6, v_min=-1.0, v_max=1.0, offset=0.004)
    a = adc.bin_width
    p = gaussian_bin_probabilities(0.2, adc).probabilities
    q = gaussian_bin_probabilities(0.2, replace(adc, offset=adc.offset + a)).probabilities
    # shifting the partition up by a moves every interior bin down one index
    assert q[1:-2] == pytest.approx(p[2:-1], abs=1e-15)


def test_histogram_converges_to_bin_probabilities():
    sigma = 0.3
    adc = with_worst_case_offset(sigma, ADC3)
    rng = np.random.default_rng(4)
    bins = quantize(rng.normal(0, sigma, 200_000), adc)
    p = gaussian_bin_probabilities(sigma, adc).probabilities
    stat, dof = chi_square_goodness_of_fit(bins, p)
    assert stat < stats.chi2.ppf(0.999, dof)


@settings(max_examples=100, deadline=None)
@given(st.floats(-2, 2), st.floats(0.05, 2.0))
def test_worst_case_min_entropy_property(offset, sigma):
    adc = AdcParams(bits=4, v_min=-8 * sigma, v_max=8 * sigma)
    worst = min_entropy(gaussian_bin_probabilities(sigma, with_worst_case_offset(sigma, adc)))
    shifted = replace(adc, offset=offset % adc.bin_width)
    assert min_entropy(gaussian_bin_probabilities(sigma, shifted)) >= worst - 1e-12


@pytest.mark.parametrize("bits", [1, 3, 8, 12])
def test_pack_round_trip(bits):
    rng = np.random.default_rng(bits)
    words = rng.integers(0, 1 << bits, size=37)
    data, valid = pack_words(words, bits)
    assert len(data) == -(-37 * bits // 8)
    assert valid == (37 * bits) % 8 or valid == 8
    assert np.array_equal(unpack_words(data, bits, 37), words)


def test_pack_is_msb_first_big_endian():
    data, valid = pack_words(np.array([0b101, 0b011, 0b111]), 3)
    # 101 011 111 -> 10101111 1(0000000)
    assert data == bytes([0b10101111, 0b10000000])
    assert valid == 1
    data, valid = pack_words(np.array([0x123]), 12)
    assert data == bytes([0x12, 0x30]) and valid == 4


def test_pack_rejects_out_of_range():
    with pytest.raises(ValueError):
        pack_words(np.array([8]), 3)
