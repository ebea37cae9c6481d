"""Transmission structure: pilot placement and overhead arithmetic.

All PN-dedicated pilots live at the start of the first coherence block:
subcarriers 0..4*gamma are the pilot zone, only subcarrier 2*gamma carries
amplitude sqrt(E_s) and the rest are zero-pilots.  Assembling the Toeplitz
pilot matrix seen by the observation rows (subcarriers gamma..3*gamma)
then yields sqrt(E_s) * I exactly, which is what makes the LS estimator a
plain read-out and minimizes leakage of higher-order PN components into
the observations.

CH-dedicated pilots (value sqrt(E_s), unit modulus) sit at the first
subcarrier of every other coherence block; block 0 reuses the PN pilot at
subcarrier 2*gamma as its channel observation.
"""

import json
from dataclasses import dataclass

import numpy as np

from .link import CoherenceSpec, OfdmSpec

__all__ = ["LayoutInfeasibleError", "PilotLayout", "build_layout", "pilot_overhead"]


class LayoutInfeasibleError(ValueError):
    """The pilot zone 0..4*gamma does not fit inside one coherence block."""


@dataclass(frozen=True)
class PilotLayout:
    """Subcarrier/symbol role assignment for one coherence time.

    Symbol roles: the first symbol ("tp") carries PN- and CH-dedicated
    pilots, the remaining n_ct-1 symbols ("tc") carry PN pilots only.
    """

    gamma: int
    n: int
    n_cb: int
    n_c: int
    n_ct: int
    symbol_energy: float
    pn_pilot_subcarriers: np.ndarray   # pilot zone 0..4*gamma
    pn_obs_subcarriers: np.ndarray     # gamma..3*gamma
    ch_pilot_subcarriers: np.ndarray   # m*n_cb for m = 1..n_c-1
    ifc_obs_subcarriers: np.ndarray    # [2*gamma] + ch pilots
    dominant_idx: np.ndarray           # [n-gamma..n-1, 0..gamma]

    @property
    def n_p(self) -> int:
        return 2 * self.gamma + 1

    @property
    def pn_pilot_subcarrier(self) -> int:
        """The single non-zero PN pilot position."""
        return 2 * self.gamma

    @property
    def slot_roles(self) -> tuple:
        return ("tp",) + ("tc",) * (self.n_ct - 1)

    def data_subcarriers(self, role: str = "tc") -> np.ndarray:
        """Complement of the pilot sets for a symbol of the given role."""
        occupied = set(self.pn_pilot_subcarriers.tolist())
        if role == "tp":
            occupied.update(self.ch_pilot_subcarriers.tolist())
        elif role != "tc":
            raise ValueError(f"role must be 'tp' or 'tc', got {role!r}")
        return np.array(sorted(set(range(self.n)) - occupied), dtype=np.int64)

    def base_symbol(self, role: str = "tc") -> np.ndarray:
        """Length-N frequency grid with pilots placed and data zeroed."""
        x = np.zeros(self.n, dtype=np.complex128)
        amp = np.sqrt(self.symbol_energy)
        x[self.pn_pilot_subcarrier] = amp
        if role == "tp":
            x[self.ch_pilot_subcarriers] = amp
        return x

    def assembled_pilot_matrix(self) -> np.ndarray:
        """Toeplitz pilot matrix seen by the observation rows.

        Entry (r, c) is the pilot value at subcarrier 2*gamma + r - c; with
        the zero-pilot design this is sqrt(E_s) * I_{N_p}.
        """
        pilot_values = self.base_symbol("tc")
        rows = np.arange(self.n_p)[:, None]
        cols = np.arange(self.n_p)[None, :]
        return pilot_values[2 * self.gamma + rows - cols]

    def resource_map(self) -> dict:
        """JSON-style subcarrier -> role map for debugging."""
        roles = {}
        for sc in self.pn_pilot_subcarriers.tolist():
            roles[sc] = "pn_zero_pilot"
        roles[self.pn_pilot_subcarrier] = "pn_pilot"
        for sc in self.ch_pilot_subcarriers.tolist():
            roles[sc] = "ch_pilot"
        return {
            "n": self.n,
            "n_cb": self.n_cb,
            "gamma": self.gamma,
            "pn_obs_subcarriers": self.pn_obs_subcarriers.tolist(),
            "subcarrier_roles": {str(k): v for k, v in sorted(roles.items())},
            "data": "all other subcarriers",
        }

    def resource_map_json(self) -> str:
        return json.dumps(self.resource_map(), indent=2, sort_keys=True)


def build_layout(ofdm: OfdmSpec, coh: CoherenceSpec, gamma: int) -> PilotLayout:
    """Construct the pilot layout for one approximation order."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    n = ofdm.n_subcarriers
    if coh.n_c * coh.n_cb != n:
        raise ValueError(
            f"coherence geometry {coh.n_c}x{coh.n_cb} does not tile n={n} subcarriers"
        )
    if 4 * gamma + 1 > coh.n_cb:
        raise LayoutInfeasibleError(
            f"pilot zone needs 4*gamma+1={4 * gamma + 1} subcarriers but "
            f"coherence blocks span only n_cb={coh.n_cb}"
        )
    ch_pilots = np.arange(1, coh.n_c) * coh.n_cb
    return PilotLayout(
        gamma=gamma,
        n=n,
        n_cb=coh.n_cb,
        n_c=coh.n_c,
        n_ct=coh.n_ct,
        symbol_energy=ofdm.symbol_energy,
        pn_pilot_subcarriers=np.arange(4 * gamma + 1),
        pn_obs_subcarriers=np.arange(gamma, 3 * gamma + 1),
        ch_pilot_subcarriers=ch_pilots,
        ifc_obs_subcarriers=np.concatenate([[2 * gamma], ch_pilots]).astype(np.int64),
        dominant_idx=np.concatenate([np.arange(n - gamma, n), np.arange(gamma + 1)]),
    )


def pilot_overhead(n: int, n_ct: int, n_c: int, n_p: int) -> float:
    """Minimum pilot fraction: (N_ct*(2*N_p - 1) + (N_c - 1)) / (N*N_ct).

    2*N_p - 1 PN-dedicated pilots per OFDM symbol (the zero-pilots count),
    plus N_c - 1 CH-dedicated pilots once per coherence time.
    """
    if min(n, n_ct, n_c, n_p) < 1:
        raise ValueError("all overhead parameters must be >= 1")
    return (n_ct * (2 * n_p - 1) + (n_c - 1)) / (n * n_ct)
