"""JSON scenario configuration: schema, defaults, validation.

Unknown keys are rejected at every level so typos cannot silently fall
back to defaults.  SNR grids are either explicit lists or
{"start", "stop", "step"} tables (stop inclusive).
"""

import json
from dataclasses import dataclass, field

from ..link import CoherenceSpec, OfdmSpec, QamSpec
from ..pilots import LayoutInfeasibleError, build_layout

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "parse_config"]

VALID_ESTIMATORS = ("ls", "lmmse")
VALID_MODES = ("proposed", "np_perfect", "no_pn")


class ConfigError(ValueError):
    """Invalid scenario configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ThroughputConfig:
    n_re: int = 12
    n_ofdm: int = 14
    t_slot_s: float = 0.25e-3
    m_qam: int = 4
    n_overhead: int = 3300
    n_c_overhead: int = 275
    n_ct_overhead: int = 7


@dataclass(frozen=True)
class OverheadConfig:
    n: int = 1200
    n_ct: int = 7
    n_c: int = 100


@dataclass(frozen=True)
class ScenarioConfig:
    n: int
    n_cp: int
    delta_f_hz: float
    symbol_energy: float
    n_cb: int
    n_ct: int
    beta_hz: tuple
    gammas: tuple
    snr_db: tuple
    trials: int
    seed: int
    estimators: tuple
    modulation: int
    modes: tuple
    deconv_guard: float
    calibration_trials: int
    throughput: ThroughputConfig = field(default_factory=ThroughputConfig)
    overhead: OverheadConfig = field(default_factory=OverheadConfig)

    def ofdm_spec(self) -> OfdmSpec:
        return OfdmSpec(self.n, self.n_cp, self.delta_f_hz, self.symbol_energy)

    def coherence_spec(self) -> CoherenceSpec:
        return CoherenceSpec.for_ofdm(self.ofdm_spec(), self.n_cb, self.n_ct)

    def qam_spec(self) -> QamSpec:
        return QamSpec(self.modulation)

    def sample_period_s(self) -> float:
        return self.ofdm_spec().sample_period_s


def _require_keys(table: dict, allowed: set, context: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {context}")


def _get(table: dict, key: str, types, context: str, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key '{key}' in {context}")
        return default
    value = table[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise ConfigError(f"{context}.{key} has invalid type {type(value).__name__}")
    return value


def _snr_grid(raw, context: str) -> tuple:
    if isinstance(raw, list):
        grid = raw
    elif isinstance(raw, dict):
        _require_keys(raw, {"start", "stop", "step"}, f"{context}.snr_db")
        start = _get(raw, "start", (int, float), context, required=True)
        stop = _get(raw, "stop", (int, float), context, required=True)
        step = _get(raw, "step", (int, float), context, required=True)
        if step <= 0 or stop < start:
            raise ConfigError(f"{context}.snr_db grid must have step > 0 and stop >= start")
        grid = []
        value = float(start)
        while value <= stop + 1e-9:
            grid.append(round(value, 9))
            value += step
    else:
        raise ConfigError(f"{context}.snr_db must be a list or a start/stop/step table")
    if not grid or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in grid):
        raise ConfigError(f"{context}.snr_db must be a non-empty list of numbers")
    return tuple(float(v) for v in grid)


def parse_config(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    _require_keys(raw, {"ofdm", "coherence", "oscillator", "experiment",
                        "calibration", "throughput", "overhead"}, "config root")
    for section in ("ofdm", "coherence", "oscillator", "experiment"):
        if section not in raw:
            raise ConfigError(f"missing required section '{section}'")
        if not isinstance(raw[section], dict):
            raise ConfigError(f"section '{section}' must be an object")

    ofdm = raw["ofdm"]
    _require_keys(ofdm, {"n", "n_cp", "delta_f_hz", "symbol_energy"}, "ofdm")
    n = _get(ofdm, "n", int, "ofdm", required=True)
    n_cp = _get(ofdm, "n_cp", int, "ofdm", default=0)
    delta_f = _get(ofdm, "delta_f_hz", (int, float), "ofdm", required=True)
    es = _get(ofdm, "symbol_energy", (int, float), "ofdm", default=1.0)

    coh = raw["coherence"]
    _require_keys(coh, {"n_cb", "n_ct"}, "coherence")
    n_cb = _get(coh, "n_cb", int, "coherence", required=True)
    n_ct = _get(coh, "n_ct", int, "coherence", default=1)

    osc = raw["oscillator"]
    _require_keys(osc, {"beta_hz"}, "oscillator")
    betas = _get(osc, "beta_hz", list, "oscillator", required=True)
    if not betas or not all(isinstance(b, (int, float)) and not isinstance(b, bool) and b >= 0
                            for b in betas):
        raise ConfigError("oscillator.beta_hz must be a non-empty list of numbers >= 0")

    exp = raw["experiment"]
    _require_keys(exp, {"gammas", "snr_db", "trials", "seed", "estimators",
                        "modulation", "modes", "deconv_guard"}, "experiment")
    gammas = _get(exp, "gammas", list, "experiment", required=True)
    if not gammas or not all(isinstance(g, int) and g >= 0 for g in gammas):
        raise ConfigError("experiment.gammas must be a non-empty list of integers >= 0")
    snr_db = _snr_grid(exp.get("snr_db"), "experiment")
    trials = _get(exp, "trials", int, "experiment", required=True)
    if trials < 1:
        raise ConfigError("experiment.trials must be >= 1")
    seed = _get(exp, "seed", int, "experiment", default=0)
    estimators = tuple(_get(exp, "estimators", list, "experiment",
                            default=["ls", "lmmse"]))
    if not estimators or any(e not in VALID_ESTIMATORS for e in estimators):
        raise ConfigError(f"experiment.estimators must be a subset of {VALID_ESTIMATORS}")
    modulation = _get(exp, "modulation", int, "experiment", default=16)
    modes = tuple(_get(exp, "modes", list, "experiment", default=["proposed"]))
    if not modes or any(m not in VALID_MODES for m in modes):
        raise ConfigError(f"experiment.modes must be a subset of {VALID_MODES}")
    guard = _get(exp, "deconv_guard", (int, float), "experiment", default=0.5)
    if not 0.0 <= guard < 1.0:
        raise ConfigError("experiment.deconv_guard must be in [0, 1)")

    cal = raw.get("calibration", {})
    if not isinstance(cal, dict):
        raise ConfigError("section 'calibration' must be an object")
    _require_keys(cal, {"trials"}, "calibration")
    cal_trials = _get(cal, "trials", int, "calibration", default=2 * trials)
    if cal_trials < 1:
        raise ConfigError("calibration.trials must be >= 1")

    thp_raw = raw.get("throughput", {})
    if not isinstance(thp_raw, dict):
        raise ConfigError("section 'throughput' must be an object")
    _require_keys(thp_raw, {"n_re", "n_ofdm", "t_slot_s", "m_qam", "n_overhead",
                            "n_c_overhead", "n_ct_overhead"}, "throughput")
    thp = ThroughputConfig(
        n_re=_get(thp_raw, "n_re", int, "throughput", default=12),
        n_ofdm=_get(thp_raw, "n_ofdm", int, "throughput", default=14),
        t_slot_s=_get(thp_raw, "t_slot_s", (int, float), "throughput", default=0.25e-3),
        m_qam=_get(thp_raw, "m_qam", int, "throughput", default=4),
        n_overhead=_get(thp_raw, "n_overhead", int, "throughput", default=3300),
        n_c_overhead=_get(thp_raw, "n_c_overhead", int, "throughput", default=275),
        n_ct_overhead=_get(thp_raw, "n_ct_overhead", int, "throughput", default=7),
    )

    oh_raw = raw.get("overhead", {})
    if not isinstance(oh_raw, dict):
        raise ConfigError("section 'overhead' must be an object")
    _require_keys(oh_raw, {"n", "n_ct", "n_c"}, "overhead")
    oh = OverheadConfig(
        n=_get(oh_raw, "n", int, "overhead", default=1200),
        n_ct=_get(oh_raw, "n_ct", int, "overhead", default=7),
        n_c=_get(oh_raw, "n_c", int, "overhead", default=100),
    )

    cfg = ScenarioConfig(
        n=n, n_cp=n_cp, delta_f_hz=float(delta_f), symbol_energy=float(es),
        n_cb=n_cb, n_ct=n_ct, beta_hz=tuple(float(b) for b in betas),
        gammas=tuple(gammas), snr_db=snr_db, trials=trials, seed=seed,
        estimators=estimators, modulation=modulation, modes=modes,
        deconv_guard=float(guard), calibration_trials=cal_trials,
        throughput=thp, overhead=oh,
    )
    _validate_feasibility(cfg)
    return cfg


def _validate_feasibility(cfg: ScenarioConfig) -> None:
    try:
        ofdm = cfg.ofdm_spec()
        coh = cfg.coherence_spec()
        cfg.qam_spec()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for gamma in cfg.gammas:
        try:
            build_layout(ofdm, coh, gamma)
        except (LayoutInfeasibleError, ValueError) as exc:
            raise ConfigError(f"gamma={gamma} infeasible: {exc}") from exc
        if gamma > cfg.n // 2 - 1:
            raise ConfigError(f"gamma={gamma} too large for n={cfg.n}")


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw)
