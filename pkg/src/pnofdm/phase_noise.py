"""Wiener phase-noise generation and its second-order statistics.

The oscillator phase is a discrete Wiener process,
phi_{n+1} = phi_n + w_n with w_n ~ N(0, 2*pi*beta*T_s), where beta is the
two-sided 3-dB linewidth of the Lorentzian line shape.  The spectrum
P_i = (1/N) sum_n e^{j phi_n} e^{-j2pi ni/N} uses the 1/N-forward
convention, so a unit-modulus time sequence has unit total spectral
power, sum_i |P_i|^2 = 1.

Statistics feeding the LMMSE estimators and the closed-form NMSEs:

* R_pp = E{p_f p_f^H} = (1/N) D Psi^T D^H with psi_{m,n} =
  exp(-pi*beta*|m-n|*T_s)  (the Gaussian increment moment generating
  function evaluated at the |m-n|-sample phase difference).
* R_pp^gamma: the (2*gamma+1)^2 submatrix of R_pp at the dominant index
  list [N-gamma, ..., N-1, 0, 1, ..., gamma].
* R_ici^gamma: residual-ICI correlations under unit-power symbols,
  R^ici_{k,l} = sum_{i=Na+k}^{N-Nb+k} R_{i,i+(l-k)} with
  Na = (N_p+1)/2, Nb = (3*N_p-1)/2.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import as_generator

__all__ = [
    "OscillatorSpec",
    "PnRealization",
    "PnStats",
    "generate_pn",
    "compute_R_pp",
    "extract_R_pp_gamma",
    "compute_R_ici_gamma",
    "p_dom",
    "dominant_indices",
    "build_pn_stats",
]


@dataclass(frozen=True)
class OscillatorSpec:
    """Free-running oscillator: two-sided 3-dB linewidth and sample period."""

    beta_hz: float
    sample_period_s: float

    def __post_init__(self):
        if self.beta_hz < 0:
            raise ValueError(f"beta_hz must be >= 0, got {self.beta_hz}")
        if self.sample_period_s <= 0:
            raise ValueError(f"sample_period_s must be > 0, got {self.sample_period_s}")

    @property
    def increment_variance(self) -> float:
        """Variance of one phase increment, 2*pi*beta*T_s (rad^2)."""
        return 2.0 * np.pi * self.beta_hz * self.sample_period_s


@dataclass(frozen=True)
class PnRealization:
    """One symbol's phase trajectory with its time/frequency representations.

    ``phi`` covers the N-sample DFT window; ``phi_prefix`` holds any
    cyclic-prefix samples consumed before the window (time only, never
    transformed).  ``p_t = exp(j*phi)`` is unit-modulus by construction
    and ``p_f`` is its 1/N-forward DFT.
    """

    phi: np.ndarray
    phi_prefix: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def p_t(self) -> np.ndarray:
        return np.exp(1j * self.phi)

    @property
    def p_f(self) -> np.ndarray:
        return np.fft.fft(np.exp(1j * self.phi)) / self.phi.size

    @property
    def final_phase(self) -> float:
        """Phase of the last sample, for continuing the process."""
        return float(self.phi[-1])


def generate_pn(spec: OscillatorSpec, n_samples: int, initial_phase: float = 0.0,
                rng=None, n_prefix: int = 0) -> PnRealization:
    """Draw one Wiener phase trajectory.

    The first generated sample equals ``initial_phase`` exactly;
    ``n_prefix`` extra leading samples model a cyclic prefix, so the DFT
    window starts after ``n_prefix`` increments and consecutive symbols
    can continue one process via ``final_phase``.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if n_prefix < 0:
        raise ValueError(f"n_prefix must be >= 0, got {n_prefix}")
    gen = as_generator(rng) if rng is not None else np.random.default_rng()
    total = n_samples + n_prefix
    increments = gen.standard_normal(total - 1) * np.sqrt(spec.increment_variance)
    phi = np.empty(total)
    phi[0] = initial_phase
    np.cumsum(increments, out=phi[1:])
    phi[1:] += initial_phase
    return PnRealization(phi=phi[n_prefix:], phi_prefix=phi[:n_prefix])


def compute_R_pp(spec: OscillatorSpec, n: int) -> np.ndarray:
    """Spectral autocorrelation R_pp = (1/N) D Psi^T D^H (N x N, Hermitian).

    Two FFT passes over the (symmetric) increment-correlation kernel Psi;
    O(N^2 log N), never the quadruple sum.  trace(R_pp) = 1.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    lag = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    psi = np.exp(-np.pi * spec.beta_hz * spec.sample_period_s * lag)
    return np.fft.ifft(np.fft.fft(psi, axis=0), axis=1) / n


def dominant_indices(n: int, gamma: int) -> np.ndarray:
    """Dominant spectral index list [N-gamma, ..., N-1, 0, 1, ..., gamma]."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    return np.concatenate([np.arange(n - gamma, n), np.arange(gamma + 1)])


def extract_R_pp_gamma(r_pp: np.ndarray, gamma: int) -> np.ndarray:
    """(2*gamma+1)^2 submatrix of R_pp at the dominant index ordering."""
    n = r_pp.shape[0]
    if not 0 <= gamma <= n // 2 - 1:
        raise ValueError(f"gamma must be in [0, {n // 2 - 1}] for n={n}, got {gamma}")
    idx = dominant_indices(n, gamma)
    return r_pp[np.ix_(idx, idx)]


def compute_R_ici_gamma(r_pp: np.ndarray, gamma: int) -> np.ndarray:
    """Residual-ICI autocorrelation (N_p x N_p) under unit-power symbols.

    Sums the near-diagonal entries of R_pp over the interferer window seen
    by each pilot observation row; exactly Hermitian and PSD.
    """
    n = r_pp.shape[0]
    n_p = 2 * gamma + 1
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    n_a = (n_p + 1) // 2
    n_b = (3 * n_p - 1) // 2
    if n - (n_a + n_b) < 0:
        raise ValueError(f"gamma={gamma} too large for n={n}: empty interferer window")
    out = np.empty((n_p, n_p), dtype=np.complex128)
    for k in range(n_p):
        for ell in range(n_p):
            d = ell - k
            diag = np.diagonal(r_pp, offset=d)
            # diag[m] = R[m, m+d] for d >= 0, R[m+|d|, m] for d < 0
            lo = n_a + k + min(d, 0)
            hi = n - n_b + k + min(d, 0) + 1
            out[k, ell] = diag[lo:hi].sum()
    return out


def p_dom(r_pp: np.ndarray, gamma: int) -> float:
    """Power captured by the 2*gamma+1 dominant components, tr(R_pp^gamma)."""
    return float(np.trace(extract_R_pp_gamma(r_pp, gamma)).real)


@dataclass
class PnStats:
    """Second-order statistics bundle for one (oscillator, N, gamma).

    ``sigma_eps_sq`` (effective-error variance) and ``g_bar`` (mean
    absolute-squared inverse time gain, channel factor normalized out)
    are filled by simulator-side calibration, not analytically.
    """

    r_pp: np.ndarray
    gamma: int
    r_pp_gamma: np.ndarray
    r_ici_gamma: np.ndarray
    p_dom: float
    sigma_eps_sq: float | None = None
    g_bar: float | None = None

    @property
    def n_p(self) -> int:
        return 2 * self.gamma + 1


def build_pn_stats(spec: OscillatorSpec, n: int, gamma: int,
                   r_pp: np.ndarray | None = None) -> PnStats:
    """Assemble PnStats; pass a precomputed ``r_pp`` to share the O(N^2) step."""
    if r_pp is None:
        r_pp = compute_R_pp(spec, n)
    sub = extract_R_pp_gamma(r_pp, gamma)
    return PnStats(
        r_pp=r_pp,
        gamma=gamma,
        r_pp_gamma=sub,
        r_ici_gamma=compute_R_ici_gamma(r_pp, gamma),
        p_dom=float(np.trace(sub).real),
    )
