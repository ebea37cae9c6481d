"""Independent oracles shared by the test modules.

Everything here is deliberately naive (direct sums, quadrature, textbook
formulas) and stays independent of the library's fast paths.
"""

import numpy as np
from scipy import integrate, special


def direct_circ_convolve(a, b):
    """O(N^2) modular-sum circular convolution."""
    n = len(a)
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        for ell in range(n):
            out[k] += a[ell] * b[(k - ell) % n]
    return out


def direct_dft_matrix(n):
    """Forward unitary DFT matrix, D[k, m] = e^{-j2pi km/n}/sqrt(n)."""
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def r_pp_double_sum(beta_hz, t_s, n):
    """Brute-force spectral autocorrelation:
    R[k,l] = (1/n^2) sum_m sum_n e^{-pi beta |m-n| Ts} e^{-j2pi(mk-nl)/n}."""
    m = np.arange(n)
    psi = np.exp(-np.pi * beta_hz * t_s * np.abs(m[:, None] - m[None, :]))
    out = np.zeros((n, n), dtype=complex)
    for k in range(n):
        for ell in range(n):
            phase = np.exp(-2j * np.pi * (m[:, None] * k - m[None, :] * ell) / n)
            out[k, ell] = np.sum(psi * phase) / n**2
    return out


def qfunc(x):
    return 0.5 * special.erfc(np.asarray(x) / np.sqrt(2.0))


def qam_awgn_ber(snr_linear, order=16):
    """Exact Gray square-QAM bit error rate over AWGN (per-axis PAM sum)."""
    n_levels = int(np.sqrt(order))
    m = int(np.log2(n_levels))
    norm = 2.0 * (n_levels**2 - 1) / 3.0
    sigma = np.sqrt(1.0 / (2.0 * snr_linear))  # per-dimension noise std
    # exact Gray-PAM bit error probability, summed over bit positions
    total = 0.0
    for bit in range(1, m + 1):
        acc = 0.0
        upper = (1 - 2**-bit) * n_levels - 1
        for i in range(int(upper) + 1):
            w = (-1) ** int(i * 2 ** (bit - 1) // n_levels)
            c = 2 ** (bit - 1) - int(i * 2 ** (bit - 1) / n_levels + 0.5)
            acc += w * c * qfunc((2 * i + 1) / (sigma * np.sqrt(norm)))
        total += (2.0 / n_levels) * acc
    return total / m


def qam_rayleigh_zf_ber(snr_linear, order=16):
    """Average AWGN BER over an Exp(1) channel power (ZF with perfect CSI)."""
    val, _ = integrate.quad(
        lambda x: np.exp(-x) * qam_awgn_ber(x * snr_linear, order), 0.0, np.inf,
        limit=200,
    )
    return val
