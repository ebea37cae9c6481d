"""CLI experiment harness: config parsing, the batched Monte Carlo engine,
experiment drivers, and CSV record emission."""

from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .engine import EnginePlan, EngineResult, NumericalFailure, run_trials
from .records import COLUMNS, SCHEMA_VERSION, ExperimentRecord, read_records, write_records
from .runs import (
    CalibrationStore,
    EXPERIMENTS,
    run_ber,
    run_calibration,
    run_experiment,
    run_nmse_ifc,
    run_nmse_pnac,
    run_overhead,
    run_throughput,
)

__all__ = [
    "ConfigError", "ScenarioConfig", "load_config", "parse_config",
    "EnginePlan", "EngineResult", "NumericalFailure", "run_trials",
    "COLUMNS", "SCHEMA_VERSION", "ExperimentRecord", "read_records", "write_records",
    "CalibrationStore", "EXPERIMENTS", "run_ber", "run_calibration",
    "run_experiment", "run_nmse_ifc", "run_nmse_pnac", "run_overhead",
    "run_throughput",
]
