import numpy as np
import pytest

from dirmod import zf
from dirmod.constellation import SymbolVector, sample_symbols
from dirmod.errors import PrecoderUndefinedError

from conftest import crandn


def test_identity_channel():
    p = zf.build(np.eye(4, dtype=complex), 8.0)
    np.testing.assert_allclose(p.P, 8 * np.eye(4), atol=1e-14)


def test_orthonormal_rows(rng):
    Q, _ = np.linalg.qr(crandn(rng, 5, 5))
    H = Q[:3]
    np.testing.assert_allclose(zf.build(H, 1.0).P, H.conj().T, atol=1e-12)


def test_random_fig3_dimensions(rng):
    H = crandn(rng, 4, 8)
    p = zf.build(H, 8.0)
    assert np.linalg.norm(H @ p.P - 8 * np.eye(4)) <= 1e-8 * 8 * 4


@pytest.mark.parametrize("H", [np.ones((2, 3), complex), np.ones((3, 2), complex)])
def test_undefined(H):
    with pytest.raises(PrecoderUndefinedError):
        zf.build(H, 1.0)


def test_transmit_identity():
    p = zf.build(np.eye(3, dtype=complex), 8.0)
    s = SymbolVector([0, 3, 6], 8)
    x = zf.transmit(p, s)
    np.testing.assert_allclose(x, 8 * s.values)
    assert zf.power(x) == pytest.approx(64 * 3)


def test_noiseless_receive_is_scaled_symbols(rng):
    H = crandn(rng, 4, 8)
    p = zf.build(H, 8.0)
    s = sample_symbols(8, 4, rng)
    np.testing.assert_allclose(H @ zf.transmit(p, s), 8 * s.values, atol=1e-8)


def test_power_homogeneous_in_beta(rng):
    H = crandn(rng, 4, 6)
    s = sample_symbols(8, 4, rng)
    a = zf.power(zf.transmit(zf.build(H, 3.0), s))
    b = zf.power(zf.transmit(zf.build(H, 6.0), s))
    assert b == pytest.approx(4 * a)


def test_average_power_independent_of_symbol_draw(rng):
    # E||P s||^2 = ||P||_F^2 for i.i.d. unit-energy zero-mean symbols
    H = crandn(rng, 4, 8)
    p = zf.build(H, 8.0)
    draws = [zf.power(zf.transmit(p, sample_symbols(8, 4, rng))) for _ in range(20000)]
    n = len(draws)
    assert abs(np.mean(draws) - np.linalg.norm(p.P) ** 2) <= 4 * np.std(draws) / np.sqrt(n)
