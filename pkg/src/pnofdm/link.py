"""OFDM grid, coherence-block channel, Gray QAM, and received-signal synthesis.

The received frequency-domain signal is
y_f = p_f (*) (x_f o h_f) + z_f, synthesized in the time domain as
DFT(p_t o IDFT(x_f o h_f)) + z_f; the two constructions are identical up
to rounding because p_f uses the 1/N-forward convention.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .numerics import as_generator
from .phase_noise import PnRealization

__all__ = [
    "OfdmSpec",
    "CoherenceSpec",
    "ChannelRealization",
    "QamSpec",
    "qam_map",
    "qam_demap",
    "draw_channel",
    "transmit_symbol",
    "count_effective_unknowns",
]


@dataclass(frozen=True)
class OfdmSpec:
    """OFDM numerology; sample period is derived, T_s = 1/(N*delta_f)."""

    n_subcarriers: int
    n_cp: int
    subcarrier_spacing_hz: float
    symbol_energy: float = 1.0

    def __post_init__(self):
        if self.n_subcarriers < 8:
            raise ValueError(f"n_subcarriers must be >= 8, got {self.n_subcarriers}")
        if self.n_cp < 0:
            raise ValueError(f"n_cp must be >= 0, got {self.n_cp}")
        if self.subcarrier_spacing_hz <= 0:
            raise ValueError("subcarrier_spacing_hz must be > 0")
        if self.symbol_energy <= 0:
            raise ValueError("symbol_energy must be > 0")

    @property
    def sample_period_s(self) -> float:
        return 1.0 / (self.n_subcarriers * self.subcarrier_spacing_hz)

    @property
    def bandwidth_hz(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing_hz

    @property
    def symbol_duration_s(self) -> float:
        """CP counts as time consumed: T_sym = (N + N_cp) * T_s."""
        return (self.n_subcarriers + self.n_cp) * self.sample_period_s


@dataclass(frozen=True)
class CoherenceSpec:
    """Coherence-block geometry: N_cb subcarriers x N_ct symbols, N_c blocks."""

    n_cb: int
    n_ct: int
    n_c: int

    def __post_init__(self):
        if self.n_cb < 1 or self.n_ct < 1 or self.n_c < 1:
            raise ValueError("n_cb, n_ct, n_c must all be >= 1")

    @classmethod
    def for_ofdm(cls, ofdm: OfdmSpec, n_cb: int, n_ct: int) -> "CoherenceSpec":
        n = ofdm.n_subcarriers
        if n % n_cb != 0:
            raise ValueError(f"n_subcarriers={n} not divisible by n_cb={n_cb}")
        return cls(n_cb=n_cb, n_ct=n_ct, n_c=n // n_cb)

    @property
    def n_subcarriers(self) -> int:
        return self.n_c * self.n_cb


@dataclass(frozen=True)
class ChannelRealization:
    """Block-constant frequency response: N_c i.i.d. CN(0,1) coefficients."""

    h_blocks: np.ndarray
    n_cb: int

    @property
    def h_f(self) -> np.ndarray:
        """Length-N response, h_f[l] = h_blocks[l // n_cb]."""
        return np.repeat(self.h_blocks, self.n_cb)


def draw_channel(coh: CoherenceSpec, rng) -> ChannelRealization:
    """Draw N_c independent CN(0,1) block coefficients."""
    gen = as_generator(rng)
    raw = gen.standard_normal(2 * coh.n_c)
    h = (raw[0::2] + 1j * raw[1::2]) / np.sqrt(2.0)
    return ChannelRealization(h_blocks=h, n_cb=coh.n_cb)


def _gray_levels(bits_per_axis: int) -> np.ndarray:
    """Amplitude of each Gray-labelled level, indexed by the bit label."""
    n_levels = 1 << bits_per_axis
    levels = np.empty(n_levels)
    for natural in range(n_levels):
        gray = natural ^ (natural >> 1)
        levels[gray] = 2 * natural - (n_levels - 1)
    return levels


@dataclass(frozen=True)
class QamSpec:
    """Square Gray-mapped QAM with unit average symbol energy.

    Per axis the reflected Gray code labels the amplitude levels, so
    constellation neighbours differ in exactly one bit.  Bit order within
    a symbol: I-axis bits (MSB first), then Q-axis bits.
    """

    order: int = 16

    def __post_init__(self):
        k = self.order.bit_length() - 1
        if self.order < 4 or (1 << k) != self.order or k % 2 != 0:
            raise ValueError(f"order must be an even power of two >= 4, got {self.order}")

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1

    @property
    def bits_per_axis(self) -> int:
        return self.bits_per_symbol // 2

    @cached_property
    def axis_levels(self) -> np.ndarray:
        return _gray_levels(self.bits_per_axis)

    @cached_property
    def scale(self) -> float:
        """Normalization making E|symbol|^2 = 1 over the constellation."""
        n_levels = 1 << self.bits_per_axis
        return float(np.sqrt(2.0 * (n_levels**2 - 1) / 3.0))

    @cached_property
    def constellation(self) -> np.ndarray:
        """All symbols indexed by the integer formed from the bit label."""
        bits = ((np.arange(self.order)[:, None] >> np.arange(self.bits_per_symbol)[::-1]) & 1)
        return qam_map(bits.ravel(), self)


def _bits_to_axis(bits: np.ndarray, qam: QamSpec) -> np.ndarray:
    weights = 1 << np.arange(qam.bits_per_axis - 1, -1, -1)
    return bits @ weights


def qam_map(bits, qam: QamSpec = QamSpec(16)) -> np.ndarray:
    """Map a flat bit array to unit-average-energy Gray QAM symbols."""
    b = np.asarray(bits, dtype=np.int64).ravel()
    k = qam.bits_per_symbol
    if b.size % k != 0:
        raise ValueError(f"bit count {b.size} not divisible by bits_per_symbol={k}")
    if b.size and (b.min() < 0 or b.max() > 1):
        raise ValueError("bits must be 0/1")
    groups = b.reshape(-1, k)
    m = qam.bits_per_axis
    i_label = _bits_to_axis(groups[:, :m], qam)
    q_label = _bits_to_axis(groups[:, m:], qam)
    levels = qam.axis_levels
    return (levels[i_label] + 1j * levels[q_label]) / qam.scale


def qam_demap(symbols, qam: QamSpec = QamSpec(16)) -> np.ndarray:
    """Minimum-distance demapping back to bits (per-axis nearest level).

    Non-finite inputs (overflowed equalizer output) clamp to a corner
    point rather than poisoning the integer cast.
    """
    s = np.nan_to_num(np.asarray(symbols, dtype=np.complex128).ravel()) * qam.scale
    n_levels = 1 << qam.bits_per_axis
    # amplitudes are 2*natural - (L-1): invert and clip, then re-encode Gray
    nat_i = np.clip(np.round((s.real + n_levels - 1) / 2).astype(np.int64), 0, n_levels - 1)
    nat_q = np.clip(np.round((s.imag + n_levels - 1) / 2).astype(np.int64), 0, n_levels - 1)
    gray_i = nat_i ^ (nat_i >> 1)
    gray_q = nat_q ^ (nat_q >> 1)
    m = qam.bits_per_axis
    shifts = np.arange(m - 1, -1, -1)
    out = np.empty((s.size, 2 * m), dtype=np.int64)
    out[:, :m] = (gray_i[:, None] >> shifts) & 1
    out[:, m:] = (gray_q[:, None] >> shifts) & 1
    return out.ravel()


def transmit_symbol(x_f, ch: ChannelRealization, pn: PnRealization,
                    noise_var: float, rng) -> np.ndarray:
    """Synthesize one received OFDM symbol in the frequency domain.

    y_f = DFT(p_t o IDFT(x_f o h_f)) + z_f with z_f i.i.d. CN(0, noise_var);
    equals p_f (*) (x_f o h_f) + z_f by DFT duality.
    """
    x = np.asarray(x_f, dtype=np.complex128)
    h = ch.h_f
    if x.size != h.size or x.size != pn.phi.size:
        raise ValueError("x_f, channel, and PN realization lengths disagree")
    y = np.fft.fft(pn.p_t * np.fft.ifft(x * h))
    if noise_var > 0:
        gen = as_generator(rng)
        raw = gen.standard_normal(2 * x.size)
        y = y + (raw[0::2] + 1j * raw[1::2]) * np.sqrt(noise_var / 2.0)
    return y


def count_effective_unknowns(n: int, n_cb: int, gamma: int, obs) -> int:
    """Distinct PN-affected-channel unknowns touched by the observations.

    Counts pairs (i, k) with i in the dominant index set and
    k = floor(((m - i) mod n) / n_cb) over all observed subcarriers m:
    the products P_i * H_k entering those received samples.
    """
    obs_arr = np.asarray(list(obs), dtype=np.int64)
    if obs_arr.size and (obs_arr.min() < 0 or obs_arr.max() >= n):
        raise ValueError("observations must lie in [0, n)")
    dom = np.concatenate([np.arange(n - gamma, n), np.arange(gamma + 1)])
    pairs = set()
    for m in obs_arr:
        for i in dom:
            k = ((m - i) % n) // n_cb
            pairs.add((int(i), int(k)))
    return len(pairs)
