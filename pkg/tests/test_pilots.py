import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pnofdm.link import CoherenceSpec, OfdmSpec
from pnofdm.pilots import LayoutInfeasibleError, build_layout, pilot_overhead


def _layout(n=64, n_cb=8, n_ct=7, gamma=1, es=1.0):
    ofdm = OfdmSpec(n, 0, 245.76e6 / n, symbol_energy=es)
    coh = CoherenceSpec.for_ofdm(ofdm, n_cb=n_cb, n_ct=n_ct)
    return build_layout(ofdm, coh, gamma)


class TestBuildLayout:
    def test_example_geometry_gamma1(self):
        # N_cb = 6-style example: pilots on 0..4 with only index 2 non-zero,
        # observations 1..3, assembled matrix the identity
        lay = _layout(n=36, n_cb=6, gamma=1)
        assert list(lay.pn_pilot_subcarriers) == [0, 1, 2, 3, 4]
        assert lay.pn_pilot_subcarrier == 2
        assert list(lay.pn_obs_subcarriers) == [1, 2, 3]
        assert_allclose(lay.assembled_pilot_matrix(), np.eye(3), atol=0)

    def test_cpe_only(self):
        lay = _layout(gamma=0)
        assert list(lay.pn_pilot_subcarriers) == [0]
        assert list(lay.pn_obs_subcarriers) == [0]
        assert_allclose(lay.assembled_pilot_matrix(), [[1.0]], atol=0)

    def test_infeasible_zone_raises(self):
        with pytest.raises(LayoutInfeasibleError):
            _layout(n=64, n_cb=8, gamma=2)  # 4*2+1 = 9 > 8

    def test_ch_pilots_at_block_starts_with_reuse(self):
        lay = _layout(n=64, n_cb=8, gamma=1)
        assert list(lay.ch_pilot_subcarriers) == [8, 16, 24, 32, 40, 48, 56]
        assert list(lay.ifc_obs_subcarriers) == [2, 8, 16, 24, 32, 40, 48, 56]

    def test_index_sets_disjoint_and_partition(self):
        lay = _layout(n=64, n_cb=16, gamma=3)
        zone = set(lay.pn_pilot_subcarriers.tolist())
        ch = set(lay.ch_pilot_subcarriers.tolist())
        assert not zone & ch
        data_tp = set(lay.data_subcarriers("tp").tolist())
        data_tc = set(lay.data_subcarriers("tc").tolist())
        assert zone | ch | data_tp == set(range(64))
        assert zone | data_tc == set(range(64))
        assert not data_tp & (zone | ch)

    @pytest.mark.parametrize("gamma,n_cb", [(0, 4), (1, 8), (2, 16), (3, 16), (7, 32)])
    def test_assembled_pilot_identity_and_rank(self, gamma, n_cb):
        es = 2.5
        lay = _layout(n=n_cb * 8, n_cb=n_cb, gamma=gamma, es=es)
        n_p = 2 * gamma + 1
        mat = lay.assembled_pilot_matrix()
        assert_allclose(mat, np.sqrt(es) * np.eye(n_p), atol=0)
        assert np.linalg.matrix_rank(mat) == n_p

    @pytest.mark.parametrize("gamma", [1, 3])
    def test_zero_pilot_isolation(self, gamma):
        # every pilot value that would multiply a higher-order PN component
        # in an observation row is exactly zero
        n = 64
        lay = _layout(n=n, n_cb=32, gamma=gamma)
        pilots = lay.base_symbol("tc")
        dominant = set(lay.dominant_idx.tolist())
        for m in lay.pn_obs_subcarriers:
            for c in lay.pn_pilot_subcarriers:
                if ((m - c) % n) not in dominant:
                    assert pilots[c] == 0.0

    def test_slot_roles(self):
        lay = _layout(n_ct=4)
        assert lay.slot_roles == ("tp", "tc", "tc", "tc")

    def test_resource_map_json(self):
        lay = _layout(n=32, n_cb=8, gamma=1, n_ct=2)
        parsed = json.loads(lay.resource_map_json())
        assert parsed["subcarrier_roles"]["2"] == "pn_pilot"
        assert parsed["subcarrier_roles"]["0"] == "pn_zero_pilot"
        assert parsed["subcarrier_roles"]["8"] == "ch_pilot"
        assert parsed["gamma"] == 1


class TestOverhead:
    def test_lte_style_values(self):
        expected = {1: 1.26, 3: 1.60, 7: 2.26, 15: 3.60}
        for n_p, pct in expected.items():
            value = pilot_overhead(1200, 7, 100, n_p) * 100
            assert abs(value - pct) <= 0.005

    def test_nr_grid_values(self):
        expected = {1: 1.22, 3: 1.34, 7: 1.58, 15: 2.06}
        for n_p, pct in expected.items():
            value = pilot_overhead(3300, 7, 275, n_p) * 100
            assert abs(value - pct) <= 0.005

    def test_single_pilot_limit(self):
        assert pilot_overhead(256, 3, 1, 1) == pytest.approx(1 / 256)

    def test_monotonicity(self):
        base = pilot_overhead(1200, 7, 100, 3)
        assert pilot_overhead(1200, 7, 100, 5) > base
        assert pilot_overhead(1200, 7, 120, 3) > base
        assert pilot_overhead(2400, 7, 100, 3) < base

    def test_validation(self):
        with pytest.raises(ValueError):
            pilot_overhead(0, 7, 100, 3)
