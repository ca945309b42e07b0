import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirmod.constellation import (
    SymbolVector,
    detect,
    psk_points,
    psk_ser_analytic,
    sample_symbols,
    ser,
)


def test_points_unit_energy_and_spacing():
    for M in (2, 4, 8, 16):
        p = psk_points(M)
        np.testing.assert_allclose(np.abs(p), 1.0)
        np.testing.assert_allclose(np.angle(p[1:] * np.conj(p[:-1])), 2 * np.pi / M)


def test_axis_points_are_exact():
    p = psk_points(8)
    assert p[2] == 1j and p[4] == -1 and p[6] == -1j


def test_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        psk_points(6)


def test_sample_bpsk(rng):
    s = sample_symbols(2, 1, rng)
    assert s.values[0] in (1, -1)


def test_sample_8psk_alphabet(rng):
    s = sample_symbols(8, 4, rng)
    assert len(s) == 4
    np.testing.assert_allclose(np.abs(s.values), 1.0)
    k = np.angle(s.values) / (np.pi / 4)
    np.testing.assert_allclose(k, np.round(k), atol=1e-12)


def test_sample_deterministic():
    a = sample_symbols(8, 16, np.random.default_rng(3))
    b = sample_symbols(8, 16, np.random.default_rng(3))
    np.testing.assert_array_equal(a.indices, b.indices)


def test_detect_on_grid():
    assert detect(3 * np.exp(1j * np.pi / 4), 8) == 1


def test_detect_inside_sector():
    assert detect(np.exp(1j * (np.pi / 4 + 0.1)), 8) == 1


def test_detect_tie_breaks_to_smaller_index():
    assert detect(1j, 2) == 0
    assert detect(-1j, 2) == 0
    assert detect(1 + 1j, 4) == 0
    assert detect(-1 + 1j, 4) == 1
    assert detect(0.0, 8) == 0


def test_detect_vectorised():
    p = psk_points(8)
    np.testing.assert_array_equal(detect(2.5 * p, 8), np.arange(8))


@given(m=st.integers(0, 7), r=st.floats(1e-6, 1e6))
def test_detect_scale_invariant(m, r):
    assert detect(psk_points(8)[m] * r, 8) == m


@given(m=st.integers(0, 7), mag=st.floats(0, 0.999), ang=st.floats(-np.pi, np.pi))
def test_detect_robust_inside_noise_radius(m, mag, ang):
    noise = mag * np.sin(np.pi / 8) * np.exp(1j * ang)
    assert detect(psk_points(8)[m] + noise, 8) == m


def test_detect_monte_carlo_matches_sector_probability():
    M, A, var, n = 8, 2.0, 1.0, 100_000
    r = np.random.default_rng(7)
    idx = r.integers(0, M, n)
    noise = np.sqrt(var / 2) * (r.standard_normal(n) + 1j * r.standard_normal(n))
    emp = np.mean(detect(A * psk_points(M)[idx] + noise, M) != idx)
    # two-dimensional Gaussian mass outside the decision sector, by dblquad
    ref = 0.2788524890792381
    assert abs(emp - ref) <= 3 * np.sqrt(ref * (1 - ref) / n)


@pytest.mark.parametrize("M,A,var,ref", [
    # dblquad over the sector in polar coordinates; BPSK row equals erfc(1)/2
    (8, 2.0, 1.0, 0.2788524890792381),
    (8, 1.0, 1.0, 0.5769055773217691),
    (4, 1.0, 0.5, 0.151113446915623),
    (2, 1.0, 1.0, 0.07864960352514272),
])
def test_analytic_ser_matches_sector_integral(M, A, var, ref):
    assert psk_ser_analytic(M, A, var) == pytest.approx(ref, abs=1e-12)


def test_ser_counting():
    t = SymbolVector([1, 2, 3, 4], 8)
    assert ser(t, [1, 2, 3, 4]) == 0
    assert ser(t, [0, 0, 0, 0]) == 1
    assert ser(t, [1, 2, 3, 5]) == 0.25


def test_ser_length_mismatch():
    with pytest.raises(ValueError):
        ser(SymbolVector([1, 2], 8), [1])


@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), min_size=1, max_size=20))
def test_ser_symmetric_mean_indicator(pairs):
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    assert ser(a, b) == ser(b, a) == pytest.approx(np.mean(a != b))
