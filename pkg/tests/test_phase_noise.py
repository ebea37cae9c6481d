import numpy as np
import pytest
from numpy.testing import assert_allclose

from pnofdm.numerics import RandomSource
from pnofdm.phase_noise import (
    OscillatorSpec,
    build_pn_stats,
    compute_R_ici_gamma,
    compute_R_pp,
    dominant_indices,
    extract_R_pp_gamma,
    generate_pn,
    p_dom,
)

from oracles import r_pp_double_sum

T_S = 1.0 / 245.76e6
OSC = OscillatorSpec(5000.0, T_S)


class TestGeneratePn:
    def test_zero_linewidth_is_constant_phase(self):
        pn = generate_pn(OscillatorSpec(0.0, T_S), 64, initial_phase=0.0,
                         rng=RandomSource(1))
        assert_allclose(pn.phi, np.zeros(64), atol=0)
        p_f = pn.p_f
        assert p_f[0] == pytest.approx(1.0)
        assert np.abs(p_f[1:]).max() < 1e-15

    def test_initial_phase_is_first_sample(self):
        pn = generate_pn(OSC, 16, initial_phase=0.7, rng=RandomSource(2))
        assert pn.phi[0] == 0.7

    def test_unit_modulus_and_parseval(self):
        pn = generate_pn(OSC, 256, initial_phase=1.2, rng=RandomSource(3))
        assert_allclose(np.abs(pn.p_t), 1.0, atol=0)
        assert np.sum(np.abs(pn.p_f) ** 2) == pytest.approx(1.0, abs=1e-10)

    def test_increment_variance(self):
        # var(phi_N - phi_0) over many runs ~ 2*pi*beta*N*T_s
        n = 128
        runs = 10_000
        gen = RandomSource(4).generator()
        drift = np.empty(runs)
        for i in range(runs):
            pn = generate_pn(OSC, n + 1, initial_phase=0.0, rng=gen)
            drift[i] = pn.phi[-1] - pn.phi[0]
        expected = OSC.increment_variance * n
        assert np.var(drift) == pytest.approx(expected, rel=0.05)

    def test_prefix_consumes_increments(self):
        pn = generate_pn(OSC, 32, initial_phase=0.0, rng=RandomSource(5), n_prefix=8)
        assert pn.phi_prefix.size == 8
        assert pn.phi.size == 32
        assert pn.phi_prefix[0] == 0.0
        # same stream without prefix produces the prefix samples first
        pn2 = generate_pn(OSC, 40, initial_phase=0.0, rng=RandomSource(5))
        assert_allclose(np.concatenate([pn.phi_prefix, pn.phi]), pn2.phi, atol=0)

    def test_final_phase_continues_process(self):
        gen = RandomSource(6).generator()
        a = generate_pn(OSC, 16, initial_phase=0.3, rng=gen)
        b = generate_pn(OSC, 16, initial_phase=a.final_phase, rng=gen)
        assert b.phi[0] == a.phi[-1]


class TestRpp:
    def test_trace_is_unit_power(self):
        for beta in (0.0, 500.0, 5000.0):
            r = compute_R_pp(OscillatorSpec(beta, T_S), 64)
            assert np.trace(r).real == pytest.approx(1.0, abs=1e-9)

    def test_zero_linewidth_concentrates_power(self):
        r = compute_R_pp(OscillatorSpec(0.0, T_S), 16)
        expected = np.zeros((16, 16))
        expected[0, 0] = 1.0
        assert_allclose(r, expected, atol=1e-10)

    def test_matches_double_sum_oracle(self):
        r = compute_R_pp(OSC, 16)
        assert_allclose(r, r_pp_double_sum(5000.0, T_S, 16), atol=1e-8)

    def test_spot_values_frozen_from_oracle(self):
        # computed once with the Appendix-style double sum at N=16
        r = compute_R_pp(OSC, 16)
        assert r[0, 0] == pytest.approx(0.9996605337546149, abs=1e-12)
        assert r[0, 1] == pytest.approx(-5.045602912851296e-05 + 1.0036328202513286e-05j, abs=1e-12)
        assert r[3, 5] == pytest.approx(3.992699693112318e-06 - 1.6538303633743965e-06j, abs=1e-12)

    def test_hermitian(self):
        r = compute_R_pp(OSC, 32)
        assert_allclose(r, r.conj().T, atol=1e-14)

    def test_kernel_diagonal_is_unity(self):
        # zero time difference: psi_{m,m} = exp(0) = 1, so the kernel sums
        # to n on its diagonal and the spectrum trace is exactly 1
        lag = np.abs(np.arange(8)[:, None] - np.arange(8)[None, :])
        psi = np.exp(-np.pi * OSC.beta_hz * OSC.sample_period_s * lag)
        assert_allclose(np.diag(psi), np.ones(8), atol=0)


class TestExtractAndPdom:
    def test_gamma_zero_is_scalar_cpe_power(self):
        r = compute_R_pp(OSC, 16)
        sub = extract_R_pp_gamma(r, 0)
        assert sub.shape == (1, 1)
        assert sub[0, 0] == r[0, 0]

    def test_ordering_matches_dominant_index_list(self):
        r = compute_R_pp(OSC, 16)
        sub = extract_R_pp_gamma(r, 2)
        idx = dominant_indices(16, 2)
        assert_allclose(sub, r[np.ix_(idx, idx)], atol=0)
        assert list(idx) == [14, 15, 0, 1, 2]

    def test_trace_equals_p_dom(self):
        r = compute_R_pp(OSC, 64)
        for gamma in (0, 1, 3):
            assert np.trace(extract_R_pp_gamma(r, gamma)).real == pytest.approx(
                p_dom(r, gamma), abs=1e-12
            )

    def test_p_dom_monotone_and_bounded(self):
        r = compute_R_pp(OSC, 64)
        values = [p_dom(r, g) for g in range(0, 16)]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] < 1.0
        assert p_dom(compute_R_pp(OscillatorSpec(0.0, T_S), 16), 0) == pytest.approx(1.0)

    def test_gamma_range_validated(self):
        r = compute_R_pp(OSC, 16)
        with pytest.raises(ValueError):
            extract_R_pp_gamma(r, 8)

    def test_p_dom_matches_monte_carlo_at_full_grid(self):
        # N=4096, gamma=1: dominant power against E{sum |P_i|^2} within 1%
        n, gamma = 4096, 1
        analytic = p_dom(compute_R_pp(OSC, n), gamma)
        idx = dominant_indices(n, gamma)
        gen = RandomSource(70).generator()
        total = 0.0
        trials, chunk = 2000, 500
        for _ in range(trials // chunk):
            incr = gen.standard_normal((chunk, n)) * np.sqrt(OSC.increment_variance)
            p_f = np.fft.fft(np.exp(1j * np.cumsum(incr, axis=1)), axis=1) / n
            total += float(np.sum(np.abs(p_f[:, idx]) ** 2))
        assert total / trials == pytest.approx(analytic, rel=0.01)

    def test_covariance_matches_generated_realizations(self):
        # E{p_bar p_bar^H} over 1e5 draws vs the analytic submatrix (N=64)
        n, gamma = 64, 1
        r_sub = extract_R_pp_gamma(compute_R_pp(OSC, n), gamma)
        idx = dominant_indices(n, gamma)
        gen = RandomSource(7).generator()
        acc = np.zeros((3, 3), dtype=complex)
        trials = 100_000
        chunk = 20_000
        for _ in range(trials // chunk):
            incr = gen.standard_normal((chunk, n)) * np.sqrt(OSC.increment_variance)
            phi = np.cumsum(incr, axis=1)
            p_bar = (np.fft.fft(np.exp(1j * phi), axis=1) / n)[:, idx]
            acc += np.einsum("bi,bj->ij", p_bar, p_bar.conj())
        emp = acc / trials
        err = np.linalg.norm(emp - r_sub) / np.linalg.norm(r_sub)
        assert err < 0.02


class TestRici:
    def test_zero_linewidth_gives_zero_matrix(self):
        r = compute_R_pp(OscillatorSpec(0.0, T_S), 32)
        assert_allclose(compute_R_ici_gamma(r, 1), np.zeros((3, 3)), atol=1e-12)

    def test_hermitian_psd_real_symmetric_diagonal(self):
        r = compute_R_pp(OSC, 64)
        for gamma in (1, 3):
            ici = compute_R_ici_gamma(r, gamma)
            n_p = 2 * gamma + 1
            assert_allclose(ici, ici.conj().T, atol=1e-14)
            assert np.linalg.eigvalsh(ici).min() > -1e-12
            diag = np.diag(ici)
            assert_allclose(diag.imag, 0.0, atol=1e-14)
            # window sums are symmetric under k <-> 2*gamma - k, and the
            # edge rows collect at least as much near-band power as the center
            assert_allclose(diag, diag[::-1], atol=1e-14)
            assert diag.real.min() == pytest.approx(diag.real[n_p // 2], rel=1e-9)

    def test_diagonal_matches_monte_carlo_residual_ici(self):
        # residual-ICI vector of the pilot observations under unit-power
        # QPSK data, zero noise: w = (e_app (*) (x o h))[obs]
        n, gamma, n_cb = 64, 1, 8
        r = compute_R_pp(OSC, n)
        ici = compute_R_ici_gamma(r, gamma)
        dom = dominant_indices(n, gamma)
        zone = np.arange(4 * gamma + 1)
        obs = np.arange(gamma, 3 * gamma + 1)
        gen = RandomSource(8).generator()
        acc = np.zeros((3, 3), dtype=complex)
        trials = 100_000
        chunk = 20_000
        for _ in range(trials // chunk):
            incr = gen.standard_normal((chunk, n)) * np.sqrt(OSC.increment_variance)
            phi = np.cumsum(incr, axis=1)
            p_f = np.fft.fft(np.exp(1j * phi), axis=1) / n
            e_app = p_f.copy()
            e_app[:, dom] = 0.0
            qpsk_bits = gen.integers(0, 2, size=(chunk, n, 2))
            x = ((1 - 2 * qpsk_bits[..., 0]) + 1j * (1 - 2 * qpsk_bits[..., 1])) / np.sqrt(2)
            x[:, zone] = 0.0
            x[:, 2 * gamma] = 1.0
            h = (gen.standard_normal((chunk, n // n_cb))
                 + 1j * gen.standard_normal((chunk, n // n_cb))) / np.sqrt(2)
            v = x * np.repeat(h, n_cb, axis=1)
            w = np.fft.ifft(np.fft.fft(e_app, axis=1) * np.fft.fft(v, axis=1), axis=1)[:, obs]
            acc += np.einsum("bi,bj->ij", w, w.conj())
        emp = acc / trials
        assert_allclose(np.diag(emp).real, np.diag(ici).real, rtol=0.05)

    def test_gamma_too_large_rejected(self):
        r = compute_R_pp(OSC, 16)
        with pytest.raises(ValueError):
            compute_R_ici_gamma(r, 4)  # window N - 2*N_p + 1 would be < 1


class TestStatsBundle:
    def test_build_pn_stats(self):
        stats = build_pn_stats(OSC, 64, 3)
        assert stats.n_p == 7
        assert stats.r_pp_gamma.shape == (7, 7)
        assert stats.r_ici_gamma.shape == (7, 7)
        assert stats.p_dom == pytest.approx(np.trace(stats.r_pp_gamma).real)
        assert stats.sigma_eps_sq is None

    def test_shared_r_pp(self):
        r = compute_R_pp(OSC, 64)
        stats = build_pn_stats(OSC, 64, 1, r_pp=r)
        assert stats.r_pp is r
