"""Experiment drivers: turn a scenario config into record lists and CSVs.

Per-combo randomness: the master seed is mixed with the experiment kind
and the (n, beta, gamma, snr) coordinates through SHA-256, so experiments
are decorrelated while trial t inside a combo is worker-independent.
The benchmark mode is deliberately excluded from the mix so proposed and
np_perfect runs share realizations (paired genie comparison).

NMSE and calibration experiments run one T_p symbol per trial (their
metrics are per-symbol quantities; distinct CH pilots always sit in
distinct coherence blocks, so the closed-form second-order model stays
exact on T_p symbols).  BER runs use the configured coherence time with
the ICI-free-channel estimate reused across it.
"""

import dataclasses
import hashlib
import json
import os
import time

import numpy as np

from .. import analysis
from ..estimators import EstimatorKind, ifc_shrinkage
from ..numerics import hermitian_solve
from ..phase_noise import OscillatorSpec, build_pn_stats, compute_R_pp, generate_pn
from ..pilots import build_layout, pilot_overhead
from .config import ScenarioConfig
from .engine import EnginePlan, NumericalFailure, run_trials
from .records import ExperimentRecord, read_records, scenario_hash, write_records

__all__ = [
    "run_overhead", "run_calibration", "run_nmse_pnac", "run_nmse_ifc",
    "run_ber", "run_throughput", "run_experiment", "EXPERIMENTS",
    "CalibrationStore", "write_pn_traces",
]

PN_TRACES_SCHEMA = "pnofdm-pn-traces-v1"


def combo_seed(master_seed: int, experiment: str, n: int, beta: float,
               gamma: int, snr_db: float, extra: str = "") -> int:
    key = f"{master_seed}|{experiment}|{n}|{beta:.6g}|{gamma}|{round(snr_db * 1000)}|{extra}"
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


def ratio_of_means(num: np.ndarray, den: np.ndarray):
    """Ratio estimator with its linearized standard error."""
    total = den.sum()
    if total == 0:
        return 0.0, 0.0
    r = num.sum() / total
    se = float(np.sqrt(np.sum((num - r * den) ** 2)) / total)
    return float(r), se


class _StatsCache:
    """Shares the O(N^2 log N) R_pp precompute across gammas and SNRs."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.t_s = cfg.sample_period_s()
        self._r_pp = {}
        self._stats = {}

    def r_pp(self, beta: float):
        if beta not in self._r_pp:
            self._r_pp[beta] = compute_R_pp(OscillatorSpec(beta, self.t_s), self.cfg.n)
        return self._r_pp[beta]

    def stats(self, beta: float, gamma: int):
        key = (beta, gamma)
        if key not in self._stats:
            self._stats[key] = build_pn_stats(
                OscillatorSpec(beta, self.t_s), self.cfg.n, gamma, r_pp=self.r_pp(beta))
        return self._stats[key]


def _base_plan(cfg: ScenarioConfig, gamma: int, beta: float, snr_db: float,
               n_ct: int) -> EnginePlan:
    layout = build_layout(cfg.ofdm_spec(), cfg.coherence_spec(), gamma)
    osc = OscillatorSpec(beta, cfg.sample_period_s())
    snr = 10.0 ** (snr_db / 10.0)
    return EnginePlan(
        n=cfg.n, n_cp=cfg.n_cp, n_cb=cfg.n_cb, n_c=cfg.n // cfg.n_cb, n_ct=n_ct,
        es=cfg.symbol_energy, gamma=gamma,
        increment_std=float(np.sqrt(osc.increment_variance)),
        noise_var=cfg.symbol_energy / snr, snr=snr, qam_order=cfg.modulation,
        pn_obs=layout.pn_obs_subcarriers, dominant_idx=layout.dominant_idx,
        ifc_obs=layout.ifc_obs_subcarriers,
        data_tp=layout.data_subcarriers("tp"), data_tc=layout.data_subcarriers("tc"),
        base_tp=layout.base_symbol("tp"), base_tc=layout.base_symbol("tc"),
    )


def _q_matrix(stats, snr: float) -> np.ndarray:
    r = stats.r_pp_gamma
    core = r + stats.r_ici_gamma + (1.0 / snr) * np.eye(r.shape[0])
    return hermitian_solve(core, r).conj().T


def _check_failures(result, cfg, context: str):
    budget = max(10, cfg.trials // 1000)
    if result.failed_trials > budget:
        raise NumericalFailure(
            f"{result.failed_trials} trials failed beyond the retry budget in {context}")


class CalibrationStore:
    """Cache of (sigma_eps_sq, g_bar) keyed by scenario point, on disk."""

    def __init__(self, path):
        self.path = path
        self.entries = {}
        if path is not None and os.path.exists(path):
            with open(path) as fh:
                payload = json.load(fh)
            if payload.get("schema") == "pnofdm-calibration-v1":
                self.entries = payload.get("entries", {})

    @staticmethod
    def key(cfg: ScenarioConfig, beta: float, gamma: int, snr_db: float,
            kind: str) -> str:
        return (f"n={cfg.n},n_cb={cfg.n_cb},n_cp={cfg.n_cp},beta={beta:.6g},"
                f"gamma={gamma},snr_mdb={round(snr_db * 1000)},pnac={kind},"
                f"trials={cfg.calibration_trials},seed={cfg.seed},"
                f"guard={cfg.deconv_guard:g}")

    def save(self):
        if self.path is None:
            return
        payload = {"schema": "pnofdm-calibration-v1", "entries": self.entries}
        tmp = f"{self.path}.tmp"
        with open(tmp, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
        os.replace(tmp, self.path)

    def ensure(self, cfg: ScenarioConfig, stats_cache: _StatsCache, beta: float,
               gamma: int, snr_db: float, kind: str, threads: int) -> dict:
        key = self.key(cfg, beta, gamma, snr_db, kind)
        if key in self.entries:
            return self.entries[key]
        stats = stats_cache.stats(beta, gamma)
        plan = _base_plan(cfg, gamma, beta, snr_db, n_ct=1)
        plan = _with(plan,
                     chain_kind=kind,
                     q_lmmse=_q_matrix(stats, plan.snr) if kind == "lmmse" else None,
                     collect=("calib",),
                     guard=cfg.deconv_guard,
                     combo_seed=combo_seed(cfg.seed, "calibrate", cfg.n, beta,
                                           gamma, snr_db, extra=kind))
        result = run_trials(plan, cfg.calibration_trials, threads=threads)
        _check_failures(result, cfg, f"calibration beta={beta} gamma={gamma} snr={snr_db}")
        ok = result.ok
        one_eps = result.metrics["calib_one_eps"][ok]
        gbar = result.metrics["calib_gbar"][ok]
        ratio, se = ratio_of_means(one_eps, gbar)
        entry = {
            "sigma_eps_sq": max(0.0, 1.0 - ratio),
            "sigma_stderr": se,
            "g_bar": float(gbar.mean()),
            "trials": int(ok.sum()),
            "guard_redraws": result.guard_redraws,
        }
        self.entries[key] = entry
        self.save()
        return entry


def _with(plan: EnginePlan, **kw) -> EnginePlan:
    return dataclasses.replace(plan, **kw)


def run_overhead(cfg: ScenarioConfig, out_dir=None, threads: int = 1) -> list:
    """Pure pilot-overhead table over the configured gamma list."""
    oh = cfg.overhead
    records = []
    for gamma in cfg.gammas:
        n_p = 2 * gamma + 1
        value = pilot_overhead(oh.n, oh.n_ct, oh.n_c, n_p)
        records.append(ExperimentRecord(
            experiment="overhead", beta_hz=0.0, gamma=gamma, estimator="none",
            mode="", snr_db=None, metric="pilot_overhead", empirical=None,
            stderr=None, closed_form=value, approx=None, trials=0,
            n=oh.n, n_cb=0, n_ct=oh.n_ct, seed=cfg.seed))
    return records


def run_calibration(cfg: ScenarioConfig, out_dir=None, threads: int = 1,
                    store: CalibrationStore | None = None) -> list:
    store = store or CalibrationStore(_store_path(out_dir))
    cache = _StatsCache(cfg)
    records = []
    for beta in cfg.beta_hz:
        for gamma in cfg.gammas:
            for kind in cfg.estimators:
                for snr_db in cfg.snr_db:
                    t0 = time.perf_counter()
                    entry = store.ensure(cfg, cache, beta, gamma, snr_db, kind, threads)
                    wall = time.perf_counter() - t0
                    common = dict(experiment="calibrate", beta_hz=beta, gamma=gamma,
                                  estimator=kind, mode="proposed", snr_db=snr_db,
                                  trials=entry["trials"], n=cfg.n, n_cb=cfg.n_cb,
                                  n_ct=1, seed=cfg.seed, wall_seconds=wall)
                    records.append(ExperimentRecord(
                        metric="sigma_eps_sq", empirical=entry["sigma_eps_sq"],
                        stderr=entry["sigma_stderr"], closed_form=None, approx=None,
                        **common))
                    records.append(ExperimentRecord(
                        metric="g_bar", empirical=entry["g_bar"], stderr=None,
                        closed_form=None, approx=None, **common))
    if out_dir is not None:
        write_pn_traces(cfg, out_dir)
    return records


def run_nmse_pnac(cfg: ScenarioConfig, out_dir=None, threads: int = 1) -> list:
    cache = _StatsCache(cfg)
    records = []
    for beta in cfg.beta_hz:
        for gamma in cfg.gammas:
            stats = cache.stats(beta, gamma)
            n_p = 2 * gamma + 1
            for snr_db in cfg.snr_db:
                t0 = time.perf_counter()
                plan = _base_plan(cfg, gamma, beta, snr_db, n_ct=1)
                plan = _with(plan,
                             pnac_kinds=tuple(cfg.estimators),
                             q_lmmse=_q_matrix(stats, plan.snr)
                             if "lmmse" in cfg.estimators else None,
                             collect=("pnac",),
                             combo_seed=combo_seed(cfg.seed, "nmse-pnac", cfg.n,
                                                   beta, gamma, snr_db))
                result = run_trials(plan, cfg.trials, threads=threads)
                _check_failures(result, cfg, f"nmse-pnac beta={beta} gamma={gamma}")
                ok = result.ok
                wall = time.perf_counter() - t0
                for kind in cfg.estimators:
                    emp, se = ratio_of_means(result.metrics[f"pnac_err_{kind}"][ok],
                                             result.metrics["pnac_ref"][ok])
                    closed = analysis.nmse_pnac_closed(EstimatorKind(kind), stats, plan.snr)
                    approx = (analysis.nmse_pnac_approx(stats.p_dom, n_p, plan.snr)
                              if kind == "ls" else None)
                    records.append(ExperimentRecord(
                        experiment="nmse-pnac", beta_hz=beta, gamma=gamma,
                        estimator=kind, mode="proposed", snr_db=snr_db,
                        metric="nmse_pnac", empirical=emp, stderr=se,
                        closed_form=closed, approx=approx, trials=int(ok.sum()),
                        n=cfg.n, n_cb=cfg.n_cb, n_ct=1, seed=cfg.seed,
                        wall_seconds=wall))
            for kind in cfg.estimators:
                records.append(ExperimentRecord(
                    experiment="nmse-pnac", beta_hz=beta, gamma=gamma,
                    estimator=kind, mode="proposed", snr_db=None,
                    metric="nmse_pnac_floor", empirical=None, stderr=None,
                    closed_form=analysis.nmse_pnac_floor(EstimatorKind(kind), stats),
                    approx=None, trials=0, n=cfg.n, n_cb=cfg.n_cb, n_ct=1,
                    seed=cfg.seed))
    return records


def run_nmse_ifc(cfg: ScenarioConfig, out_dir=None, threads: int = 1,
                 store: CalibrationStore | None = None) -> list:
    """ICI-free-channel NMSE; the chain uses the LMMSE PNAC estimator.

    The NMSE is measured over the CH-dedicated pilot blocks (the reused
    PN-pilot block is estimated and used by the chain but not scored;
    see the engine notes), against the per-trial distorted reference.
    """
    store = store or CalibrationStore(_store_path(out_dir))
    cache = _StatsCache(cfg)
    records = []
    pnac_kind = "lmmse"
    for beta in cfg.beta_hz:
        for gamma in cfg.gammas:
            stats = cache.stats(beta, gamma)
            sigma_by_snr = {}
            for snr_db in cfg.snr_db:
                t0 = time.perf_counter()
                entry = store.ensure(cfg, cache, beta, gamma, snr_db, pnac_kind, threads)
                sigma = entry["sigma_eps_sq"]
                sigma_by_snr[snr_db] = sigma
                plan = _base_plan(cfg, gamma, beta, snr_db, n_ct=1)
                shrink = {kind: ifc_shrinkage(EstimatorKind(kind), sigma, plan.snr)
                          for kind in cfg.estimators}
                plan = _with(plan,
                             chain_kind=pnac_kind,
                             q_lmmse=_q_matrix(stats, plan.snr),
                             ifc_kinds=tuple(cfg.estimators),
                             ifc_shrink=shrink,
                             collect=("ifc",),
                             guard=cfg.deconv_guard,
                             combo_seed=combo_seed(cfg.seed, "nmse-ifc", cfg.n,
                                                   beta, gamma, snr_db))
                result = run_trials(plan, cfg.trials, threads=threads)
                _check_failures(result, cfg, f"nmse-ifc beta={beta} gamma={gamma}")
                ok = result.ok
                wall = time.perf_counter() - t0
                for kind in cfg.estimators:
                    emp, se = ratio_of_means(result.metrics[f"ifc_err_{kind}"][ok],
                                             result.metrics["ifc_ref"][ok])
                    closed = analysis.nmse_ifc_closed(EstimatorKind(kind), sigma, plan.snr)
                    records.append(ExperimentRecord(
                        experiment="nmse-ifc", beta_hz=beta, gamma=gamma,
                        estimator=kind, mode="proposed", snr_db=snr_db,
                        metric="nmse_ifc", empirical=emp, stderr=se,
                        closed_form=closed, approx=None, trials=int(ok.sum()),
                        n=cfg.n, n_cb=cfg.n_cb, n_ct=1, seed=cfg.seed,
                        wall_seconds=wall))
            sigma_floor = sigma_by_snr[max(cfg.snr_db)]
            for kind in cfg.estimators:
                records.append(ExperimentRecord(
                    experiment="nmse-ifc", beta_hz=beta, gamma=gamma,
                    estimator=kind, mode="proposed", snr_db=None,
                    metric="nmse_ifc_floor", empirical=None, stderr=None,
                    closed_form=analysis.nmse_ifc_floor(EstimatorKind(kind), sigma_floor),
                    approx=None, trials=0, n=cfg.n, n_cb=cfg.n_cb, n_ct=1,
                    seed=cfg.seed))
    return records


def run_ber(cfg: ScenarioConfig, out_dir=None, threads: int = 1,
            store: CalibrationStore | None = None) -> list:
    store = store or CalibrationStore(_store_path(out_dir))
    cache = _StatsCache(cfg)
    records = []
    for beta in cfg.beta_hz:
        for gamma in cfg.gammas:
            stats = cache.stats(beta, gamma)
            for kind in cfg.estimators:
                for mode in cfg.modes:
                    if mode == "no_pn":
                        continue  # handled once per (beta, snr) below
                    for snr_db in cfg.snr_db:
                        t0 = time.perf_counter()
                        plan = _base_plan(cfg, gamma, beta, snr_db, n_ct=cfg.n_ct)
                        sigma = 0.0
                        if kind == "lmmse":
                            sigma = store.ensure(cfg, cache, beta, gamma, snr_db,
                                                 kind, threads)["sigma_eps_sq"]
                        shrink = {kind: ifc_shrinkage(EstimatorKind(kind), sigma, plan.snr)}
                        plan = _with(plan,
                                     chain_kind="genie" if mode == "np_perfect" else kind,
                                     q_lmmse=_q_matrix(stats, plan.snr)
                                     if kind == "lmmse" else None,
                                     ifc_kinds=(kind,), ifc_shrink=shrink,
                                     ber_ifc_kind=kind, mode=mode,
                                     collect=("ber",),
                                     combo_seed=combo_seed(cfg.seed, "ber", cfg.n,
                                                           beta, gamma, snr_db,
                                                           extra=f"kind={kind}"))
                        result = run_trials(plan, cfg.trials, threads=threads)
                        _check_failures(result, cfg,
                                        f"ber beta={beta} gamma={gamma} mode={mode}")
                        ok = result.ok
                        wall = time.perf_counter() - t0
                        emp, se = ratio_of_means(result.metrics["ber_errors"][ok],
                                                 result.metrics["ber_bits"][ok])
                        records.append(ExperimentRecord(
                            experiment="ber", beta_hz=beta, gamma=gamma,
                            estimator=kind, mode=mode, snr_db=snr_db, metric="ber",
                            empirical=emp, stderr=se, closed_form=None, approx=None,
                            trials=int(ok.sum()), n=cfg.n, n_cb=cfg.n_cb,
                            n_ct=cfg.n_ct, seed=cfg.seed, wall_seconds=wall))
                        if mode == "proposed":
                            emp_g, se_g = ratio_of_means(
                                result.metrics["ber_genie_errors"][ok],
                                result.metrics["ber_bits"][ok])
                            records.append(ExperimentRecord(
                                experiment="ber", beta_hz=beta, gamma=gamma,
                                estimator=kind, mode=mode, snr_db=snr_db,
                                metric="ber_genie_ifc", empirical=emp_g, stderr=se_g,
                                closed_form=None, approx=None, trials=int(ok.sum()),
                                n=cfg.n, n_cb=cfg.n_cb, n_ct=cfg.n_ct, seed=cfg.seed))
        if "no_pn" in cfg.modes:
            for snr_db in cfg.snr_db:
                plan = _base_plan(cfg, min(cfg.gammas), beta, snr_db, n_ct=cfg.n_ct)
                plan = _with(plan, mode="no_pn", increment_std=0.0, collect=("ber",),
                             combo_seed=combo_seed(cfg.seed, "ber", cfg.n, beta,
                                                   min(cfg.gammas), snr_db,
                                                   extra="kind=none"))
                result = run_trials(plan, cfg.trials, threads=threads)
                ok = result.ok
                emp, se = ratio_of_means(result.metrics["ber_errors"][ok],
                                         result.metrics["ber_bits"][ok])
                records.append(ExperimentRecord(
                    experiment="ber", beta_hz=beta, gamma=min(cfg.gammas),
                    estimator="none", mode="no_pn", snr_db=snr_db, metric="ber",
                    empirical=emp, stderr=se, closed_form=None, approx=None,
                    trials=int(ok.sum()), n=cfg.n, n_cb=cfg.n_cb, n_ct=cfg.n_ct,
                    seed=cfg.seed))
    return records


def run_throughput(cfg: ScenarioConfig, out_dir=None, threads: int = 1,
                   ber_records: list | None = None,
                   store: CalibrationStore | None = None) -> list:
    """Throughput from measured BER plus the pure-overhead table."""
    if ber_records is None:
        path = None if out_dir is None else os.path.join(out_dir, "ber.csv")
        if path is not None and os.path.exists(path):
            ber_records = read_records(path)
        else:
            ber_records = run_ber(cfg, out_dir, threads, store=store)
    thp = cfg.throughput
    records = run_overhead(cfg)
    for gamma in cfg.gammas:
        n_p = 2 * gamma + 1
        rho = pilot_overhead(thp.n_overhead, thp.n_ct_overhead, thp.n_c_overhead, n_p)
        records.append(ExperimentRecord(
            experiment="throughput", beta_hz=0.0, gamma=gamma, estimator="none",
            mode="", snr_db=None, metric="pilot_overhead", empirical=None,
            stderr=None, closed_form=rho, approx=None, trials=0,
            n=thp.n_overhead, n_cb=cfg.n_cb, n_ct=thp.n_ct_overhead, seed=cfg.seed))
        peak = analysis.throughput(rho, thp.n_c_overhead, thp.n_re, thp.n_ofdm,
                                   thp.t_slot_s, thp.m_qam, 0.0)
        for rec in ber_records:
            if rec.metric != "ber" or rec.mode != "proposed" or rec.gamma != gamma:
                continue
            value = analysis.throughput(rho, thp.n_c_overhead, thp.n_re, thp.n_ofdm,
                                        thp.t_slot_s, thp.m_qam, rec.empirical)
            slope = peak  # |d THP / d BER|
            records.append(ExperimentRecord(
                experiment="throughput", beta_hz=rec.beta_hz, gamma=gamma,
                estimator=rec.estimator, mode="proposed", snr_db=rec.snr_db,
                metric="throughput_bps", empirical=value,
                stderr=(slope * rec.stderr if rec.stderr is not None else None),
                closed_form=peak, approx=None, trials=rec.trials, n=cfg.n,
                n_cb=cfg.n_cb, n_ct=cfg.n_ct, seed=cfg.seed))
    return records


def write_pn_traces(cfg: ScenarioConfig, out_dir, n_psd_trials: int = 500) -> str:
    """Auxiliary CSV for the PN trajectory/spectrum figure (pure view data).

    Schema pnofdm-pn-traces-v1: beta_hz,kind,index,x,value with one phase
    trajectory (x = time in s, value = radians) and the averaged spectrum
    (x = frequency offset in Hz, value = dB) per linewidth.
    """
    t_s = cfg.sample_period_s()
    n = cfg.n
    path = os.path.join(out_dir, "pn_traces.csv")
    lines = [f"# schema={PN_TRACES_SCHEMA}", "beta_hz,kind,index,x,value"]
    for beta in cfg.beta_hz:
        osc = OscillatorSpec(beta, t_s)
        seed = combo_seed(cfg.seed, "pn-trace", n, beta, 0, 0.0)
        gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        pn = generate_pn(osc, n, initial_phase=0.0, rng=gen)
        for i, phi in enumerate(pn.phi):
            lines.append(f"{beta!r},trace,{i},{float(i * t_s)!r},{float(phi)!r}")
        acc = np.zeros(n)
        for _ in range(n_psd_trials):
            trial = generate_pn(osc, n, initial_phase=0.0, rng=gen)
            acc += np.abs(trial.p_f) ** 2
        psd_db = 10.0 * np.log10(np.maximum(acc / n_psd_trials, 1e-30))
        freq = np.fft.fftfreq(n, d=1.0) * n * cfg.delta_f_hz
        for i in np.argsort(freq):
            lines.append(f"{beta!r},psd,{i},{float(freq[i])!r},{float(psd_db[i])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _store_path(out_dir):
    return None if out_dir is None else os.path.join(out_dir, "calibration.json")


EXPERIMENTS = {
    "overhead": (run_overhead, "overhead.csv"),
    "calibrate": (run_calibration, "calibrate.csv"),
    "nmse-pnac": (run_nmse_pnac, "nmse_pnac.csv"),
    "nmse-ifc": (run_nmse_ifc, "nmse_ifc.csv"),
    "ber": (run_ber, "ber.csv"),
    "throughput": (run_throughput, "throughput.csv"),
}


def run_experiment(name: str, cfg: ScenarioConfig, out_dir, threads: int = 1) -> list:
    """Run one experiment kind and write its CSV; returns the records."""
    runner, filename = EXPERIMENTS[name]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    records = runner(cfg, out_dir, threads)
    digest = scenario_hash(cfg)
    for rec in records:
        rec.scenario_hash = digest
    if out_dir is not None:
        write_records(os.path.join(out_dir, filename), records)
    return records
