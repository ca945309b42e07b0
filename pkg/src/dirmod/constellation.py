"""M-PSK alphabet, symbol sampling, nearest-phase detection and SER."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * np.pi


def check_order(M):
    M = int(M)
    if M < 2 or M & (M - 1):
        raise ValueError(f"modulation order must be a power of two >= 2, got {M}")
    return M


def psk_points(M):
    """Unit-energy M-PSK points (read-only); point m has phase 2*pi*m/M.

    Components that are zero in exact arithmetic (e.g. Re at phase pi/2)
    are snapped to 0.0 so downstream sign tests see a clean zero.
    """
    return _psk_points(check_order(M))


@lru_cache(maxsize=None)
def _psk_points(M):
    phases = TWO_PI * np.arange(M) / M
    re = np.cos(phases)
    im = np.sin(phases)
    re[np.abs(re) < 1e-15] = 0.0
    im[np.abs(im) < 1e-15] = 0.0
    pts = re + 1j * im
    pts.setflags(write=False)
    return pts


@dataclass(frozen=True)
class SymbolVector:
    """K M-PSK symbols, one per legitimate receive antenna."""

    indices: np.ndarray
    M: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        if idx.size < 1:
            raise ValueError("symbol vector must be non-empty")
        if np.any(idx < 0) or np.any(idx >= self.M):
            raise ValueError(f"symbol indices must lie in [0, {self.M})")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "M", check_order(self.M))

    @property
    def values(self):
        return psk_points(self.M)[self.indices]

    @property
    def phases(self):
        return TWO_PI * self.indices / self.M

    def __len__(self):
        return self.indices.size


def sample_symbols(M, K, rng):
    """Draw K i.i.d. uniform M-PSK symbols from the generator ``rng``."""
    M = check_order(M)
    if K < 1:
        raise ValueError("K must be >= 1")
    return SymbolVector(rng.integers(0, M, size=K), M)


def detect(received, M):
    """Nearest-phase (ML for equal-energy PSK) decision, elementwise.

    Accepts a scalar or an array; returns int index / int array. Points
    exactly on a sector boundary resolve to the smaller index, and a zero
    input maps to index 0.
    """
    M = check_order(M)
    r = np.asarray(received, dtype=complex)
    sector = TWO_PI / M
    # shift by half a sector so decision regions become [m*sector, (m+1)*sector)
    phase = np.mod(np.angle(r) + 0.5 * sector, TWO_PI)
    idx = np.floor(phase / sector).astype(np.int64)
    # a phase exactly on the upper edge of region m belongs to m (smaller index)
    on_edge = (phase == idx * sector) & (idx > 0)
    idx = np.where(on_edge, idx - 1, idx) % M
    # boundary between M-1 and 0 resolves to 0
    if np.ndim(idx) == 0:
        return int(idx)
    return idx


def ser(truth, decisions):
    """Fraction of positions where the decision differs from the truth."""
    t = truth.indices if isinstance(truth, SymbolVector) else np.asarray(truth).reshape(-1)
    d = decisions.indices if isinstance(decisions, SymbolVector) else np.asarray(decisions).reshape(-1)
    if t.shape != d.shape:
        raise ValueError(f"length mismatch: {t.size} truth vs {d.size} decisions")
    if t.size == 0:
        raise ValueError("empty symbol vectors")
    return float(np.count_nonzero(t != d)) / t.size


def psk_ser_analytic(M, amplitude, noise_variance):
    """Symbol error probability of M-PSK at ``amplitude`` in CN(0, noise_variance).

    Integrates the exact angular-sector error probability
    ``(1/pi) * int_0^{(M-1)pi/M} exp(-snr sin^2(pi/M) / sin^2(t)) dt``
    with ``snr = amplitude**2 / noise_variance``.
    """
    M = check_order(M)
    if noise_variance <= 0:
        return 0.0
    snr = amplitude ** 2 / noise_variance
    a = np.sin(np.pi / M) ** 2

    def integrand(t):
        st = np.sin(t)
        return np.exp(-snr * a / (st * st)) if st != 0.0 else 0.0

    val, _ = integrate.quad(integrand, 0.0, (M - 1) * np.pi / M, limit=200, epsabs=1e-13)
    return float(val / np.pi)
