"""Closed-form performance expressions.

PN-affected channel (normalized MSE against f_bar = H_k * p_bar):

* LS:     tr{R_ici^g + (1/SNR) I} / tr{R_pp^g}
* LMMSE:  1 - tr{R_pp^g (R_pp^g + R_ici^g + (1/SNR) I)^-1 R_pp^g} / tr{R_pp^g}
* LS approximation: (1 - P_dom + N_p/SNR) / P_dom, with low/high-SNR limits
  (N_p/P_dom)/SNR and (1 - P_dom)/P_dom.

ICI-free channel (normalized MSE against the distorted block channel):

* LS:     (1/SNR + sigma_eps^2) / (1 - sigma_eps^2)
* LMMSE:  (1 + sigma_eps^2 * SNR) / (1 + SNR)
* floors: sigma_eps^2/(1 - sigma_eps^2) and sigma_eps^2.

Throughput: (1 - rho_oh) * (N_c*N_re*N_ofdm/T_slot) * M_qam * (1 - BER).
"""

from dataclasses import dataclass, field

import numpy as np

from .estimators import EstimatorKind
from .numerics import hermitian_solve
from .phase_noise import PnStats

__all__ = [
    "nmse_pnac_closed",
    "nmse_pnac_floor",
    "nmse_pnac_approx",
    "nmse_pnac_approx_low_snr",
    "nmse_pnac_approx_high_snr",
    "nmse_ifc_closed",
    "nmse_ifc_floor",
    "throughput",
    "NmseReport",
]

_FLOOR_SNR = 1e12  # proxy for SNR -> infinity in floor evaluations


def nmse_pnac_closed(kind: EstimatorKind, stats: PnStats, snr: float) -> float:
    """Closed-form PN-affected-channel NMSE at a linear SNR."""
    if snr <= 0:
        raise ValueError(f"snr must be > 0, got {snr}")
    r = stats.r_pp_gamma
    n_p = r.shape[0]
    tr_r = np.trace(r).real
    if kind == EstimatorKind.LS:
        return float((np.trace(stats.r_ici_gamma).real + n_p / snr) / tr_r)
    core = r + stats.r_ici_gamma + (1.0 / snr) * np.eye(n_p)
    quad = np.trace(r @ hermitian_solve(core, r)).real
    return float(1.0 - quad / tr_r)


def nmse_pnac_floor(kind: EstimatorKind, stats: PnStats) -> float:
    """Infinite-SNR limit of the closed form (the Monte Carlo error floor)."""
    if kind == EstimatorKind.LS:
        return float(np.trace(stats.r_ici_gamma).real / np.trace(stats.r_pp_gamma).real)
    return nmse_pnac_closed(kind, stats, _FLOOR_SNR)


def nmse_pnac_approx(p_dom: float, n_p: int, snr: float) -> float:
    """Trace-level LS approximation (1 - P_dom + N_p/SNR) / P_dom."""
    if not 0.0 < p_dom <= 1.0:
        raise ValueError(f"p_dom must be in (0, 1], got {p_dom}")
    return (1.0 - p_dom + n_p / snr) / p_dom


def nmse_pnac_approx_high_snr(p_dom: float) -> float:
    return (1.0 - p_dom) / p_dom


def nmse_pnac_approx_low_snr(p_dom: float, n_p: int, snr: float) -> float:
    return (n_p / p_dom) / snr


def nmse_ifc_closed(kind: EstimatorKind, sigma_eps_sq: float, snr: float) -> float:
    """Closed-form ICI-free-channel NMSE from the effective-error variance."""
    if not 0.0 <= sigma_eps_sq < 1.0:
        raise ValueError(f"sigma_eps_sq must be in [0, 1), got {sigma_eps_sq}")
    if snr <= 0:
        raise ValueError(f"snr must be > 0, got {snr}")
    if kind == EstimatorKind.LS:
        return (1.0 / snr + sigma_eps_sq) / (1.0 - sigma_eps_sq)
    return (1.0 + sigma_eps_sq * snr) / (1.0 + snr)


def nmse_ifc_floor(kind: EstimatorKind, sigma_eps_sq: float) -> float:
    """Infinite-SNR NMSE floor of the ICI-free-channel estimators."""
    if not 0.0 <= sigma_eps_sq < 1.0:
        raise ValueError(f"sigma_eps_sq must be in [0, 1), got {sigma_eps_sq}")
    if kind == EstimatorKind.LS:
        return sigma_eps_sq / (1.0 - sigma_eps_sq)
    return sigma_eps_sq


def throughput(rho_oh: float, n_c: int, n_re: int, n_ofdm: int,
               t_slot_s: float, m_qam: int, ber: float) -> float:
    """Delivered rate in bit/s net of pilot overhead and bit errors."""
    if not 0.0 <= rho_oh < 1.0:
        raise ValueError(f"rho_oh must be in [0, 1), got {rho_oh}")
    if not 0.0 <= ber <= 1.0:
        raise ValueError(f"ber must be in [0, 1], got {ber}")
    if t_slot_s <= 0:
        raise ValueError("t_slot_s must be > 0")
    return (1.0 - rho_oh) * (n_c * n_re * n_ofdm / t_slot_s) * m_qam * (1.0 - ber)


@dataclass
class NmseReport:
    """One estimator/gamma NMSE curve over an SNR grid, with its floor."""

    kind: EstimatorKind
    gamma: int
    snr_db: np.ndarray
    closed_form: np.ndarray
    floor: float
    approx: np.ndarray | None = None
    empirical: np.ndarray | None = None
    stderr: np.ndarray | None = None
    trials: int = 0
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.closed_form < 0):
            raise ValueError("NMSE values must be nonnegative")
        if self.floor > np.min(self.closed_form) * (1 + 1e-9):
            raise ValueError("floor exceeds the closed form at finite SNR")
