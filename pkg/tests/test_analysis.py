import numpy as np
import pytest

from pnofdm.analysis import (
    NmseReport,
    nmse_ifc_closed,
    nmse_ifc_floor,
    nmse_pnac_approx,
    nmse_pnac_approx_high_snr,
    nmse_pnac_approx_low_snr,
    nmse_pnac_closed,
    nmse_pnac_floor,
    throughput,
)
from pnofdm.estimators import EstimatorKind
from pnofdm.phase_noise import OscillatorSpec, build_pn_stats, compute_R_pp, p_dom

T_S = 1.0 / 245.76e6
LS, LMMSE = EstimatorKind.LS, EstimatorKind.LMMSE


class TestNmsePnac:
    def test_awgn_only_scalar_case(self):
        # beta=0, gamma=0: R_ici = 0 and P_dom = 1, so LS NMSE = 1/SNR
        stats = build_pn_stats(OscillatorSpec(0.0, T_S), 64, 0)
        for snr in (0.5, 10.0, 1e4):
            assert nmse_pnac_closed(LS, stats, snr) == pytest.approx(1.0 / snr, rel=1e-9)

    def test_ls_floor_is_trace_ratio(self):
        stats = build_pn_stats(OscillatorSpec(5000.0, T_S), 64, 1)
        expected = np.trace(stats.r_ici_gamma).real / np.trace(stats.r_pp_gamma).real
        assert nmse_pnac_floor(LS, stats) == pytest.approx(expected, rel=1e-12)
        assert nmse_pnac_closed(LS, stats, 1e9) == pytest.approx(expected, rel=1e-3)

    def test_lmmse_below_ls_everywhere(self):
        stats = build_pn_stats(OscillatorSpec(5000.0, T_S), 128, 3)
        for snr_db in range(-10, 45, 5):
            snr = 10 ** (snr_db / 10)
            assert nmse_pnac_closed(LMMSE, stats, snr) <= nmse_pnac_closed(LS, stats, snr) * (1 + 1e-12)

    def test_monotone_in_snr(self):
        stats = build_pn_stats(OscillatorSpec(500.0, T_S), 128, 1)
        grid = [10 ** (s / 10) for s in range(-10, 45, 5)]
        for kind in (LS, LMMSE):
            vals = [nmse_pnac_closed(kind, stats, s) for s in grid]
            assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_floor_at_1e9(self):
        stats = build_pn_stats(OscillatorSpec(5000.0, T_S), 128, 3)
        for kind in (LS, LMMSE):
            assert nmse_pnac_closed(kind, stats, 1e9) == pytest.approx(
                nmse_pnac_floor(kind, stats), rel=1e-3
            )


class TestNmsePnacApprox:
    def test_perfect_capture_no_noise(self):
        assert nmse_pnac_approx_high_snr(1.0) == 0.0
        assert nmse_pnac_approx(1.0, 1, 1e12) == pytest.approx(0.0, abs=1e-11)

    def test_low_snr_limit(self):
        p, n_p, snr = 0.97, 3, 0.01
        approx = nmse_pnac_approx(p, n_p, snr)
        limit = nmse_pnac_approx_low_snr(p, n_p, snr)
        assert approx == pytest.approx(limit, rel=0.01)

    def test_low_snr_penalty_increases_with_gamma(self):
        # f(gamma) = N_p / P_dom grows with gamma: more pilots buy noise
        r = compute_R_pp(OscillatorSpec(5000.0, T_S), 4096)
        f = [(2 * g + 1) / p_dom(r, g) for g in (0, 1, 3, 7)]
        assert all(b > a for a, b in zip(f, f[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            nmse_pnac_approx(0.0, 1, 1.0)


class TestNmseIfc:
    def test_zero_effective_error(self):
        for snr in (1.0, 100.0):
            assert nmse_ifc_closed(LS, 0.0, snr) == pytest.approx(1.0 / snr)
            assert nmse_ifc_closed(LMMSE, 0.0, snr) == pytest.approx(1.0 / (1.0 + snr))

    def test_floors(self):
        s = 0.02
        assert nmse_ifc_floor(LS, s) == pytest.approx(s / (1 - s))
        assert nmse_ifc_floor(LMMSE, s) == s
        for kind in (LS, LMMSE):
            assert nmse_ifc_closed(kind, s, 1e9) == pytest.approx(
                nmse_ifc_floor(kind, s), rel=1e-3
            )

    def test_small_sigma_floors_agree(self):
        # first-order expansion: LS floor ~ LMMSE floor for sigma << 1
        s = 1e-3
        assert nmse_ifc_floor(LS, s) == pytest.approx(nmse_ifc_floor(LMMSE, s), rel=2e-3)

    def test_lmmse_below_ls(self):
        for snr_db in range(-10, 65, 5):
            snr = 10 ** (snr_db / 10)
            assert nmse_ifc_closed(LMMSE, 0.01, snr) <= nmse_ifc_closed(LS, 0.01, snr)

    def test_sigma_validated(self):
        with pytest.raises(ValueError):
            nmse_ifc_closed(LS, 1.0, 10.0)
        with pytest.raises(ValueError):
            nmse_ifc_closed(LS, -0.1, 10.0)


class TestThroughput:
    def test_zero_loss_anchor(self):
        # N_c*N_re*N_ofdm/T_slot * M_qam = 275*12*14/0.25ms * 4 = 739.2 Mbit/s
        value = throughput(0.0, 275, 12, 14, 0.25e-3, 4, 0.0)
        assert value == pytest.approx(739.2e6, rel=1e-12)

    def test_total_loss(self):
        assert throughput(0.1, 275, 12, 14, 0.25e-3, 4, 1.0) == 0.0

    def test_composite_row(self):
        value = throughput(0.0134, 275, 12, 14, 0.25e-3, 4, 0.048)
        assert value == pytest.approx((1 - 0.0134) * 739.2e6 * (1 - 0.048), rel=1e-12)
        assert value == pytest.approx(694.3e6, rel=1e-3)

    def test_affine_decreasing(self):
        base = throughput(0.01, 275, 12, 14, 0.25e-3, 4, 0.01)
        assert throughput(0.02, 275, 12, 14, 0.25e-3, 4, 0.01) < base
        assert throughput(0.01, 275, 12, 14, 0.25e-3, 4, 0.02) < base

    def test_validation(self):
        with pytest.raises(ValueError):
            throughput(1.0, 1, 1, 1, 1.0, 4, 0.0)
        with pytest.raises(ValueError):
            throughput(0.0, 1, 1, 1, 1.0, 4, 1.5)


class TestNmseReport:
    def test_floor_consistency_enforced(self):
        with pytest.raises(ValueError):
            NmseReport(kind=LS, gamma=0, snr_db=np.array([0.0]),
                       closed_form=np.array([0.1]), floor=0.2)

    def test_valid_report(self):
        rep = NmseReport(kind=LS, gamma=1, snr_db=np.array([0.0, 10.0]),
                         closed_form=np.array([0.5, 0.1]), floor=0.05)
        assert rep.trials == 0
