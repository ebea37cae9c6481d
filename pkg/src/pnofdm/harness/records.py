"""Experiment record rows and the versioned CSV schema.

One CSV per experiment kind; the first line is a schema comment, then the
fixed 16-column header.  Rows are sorted before writing so aggregation
order never leaks into the output, and floats are serialized with
``repr`` (shortest round-trip form) so identical runs produce
byte-identical files.  ``wall_seconds`` stays in memory only.
"""

import csv
import hashlib
import json
from dataclasses import dataclass, field

__all__ = ["SCHEMA_VERSION", "COLUMNS", "ExperimentRecord",
           "write_records", "read_records", "scenario_hash"]

SCHEMA_VERSION = "pnofdm-results-v1"
COLUMNS = ("experiment", "beta_hz", "gamma", "estimator", "mode", "snr_db",
           "metric", "empirical", "stderr", "closed_form", "approx",
           "trials", "n", "n_cb", "n_ct", "seed")


@dataclass
class ExperimentRecord:
    experiment: str
    beta_hz: float
    gamma: int
    estimator: str
    mode: str
    snr_db: float | None
    metric: str
    empirical: float | None
    stderr: float | None
    closed_form: float | None
    approx: float | None
    trials: int
    n: int
    n_cb: int
    n_ct: int
    seed: int
    wall_seconds: float = field(default=0.0, compare=False)
    scenario_hash: str = field(default="", compare=False)

    def row(self) -> list:
        return [_fmt(getattr(self, c)) for c in COLUMNS]


def scenario_hash(config) -> str:
    """Short stable digest of a ScenarioConfig for logs."""
    blob = json.dumps(config.__dict__, default=lambda o: o.__dict__, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sort_key(rec: ExperimentRecord):
    return (rec.experiment, rec.beta_hz, rec.gamma, rec.estimator, rec.mode,
            rec.metric, rec.snr_db if rec.snr_db is not None else float("-inf"))


def write_records(path, records) -> None:
    rows = sorted(records, key=_sort_key)
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={SCHEMA_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for rec in rows:
            writer.writerow(rec.row())


def read_records(path) -> list:
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# schema={SCHEMA_VERSION}":
            raise ValueError(f"unexpected schema line {first!r} in {path}")
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected header in {path}")
        out = []
        for row in reader:
            vals = dict(zip(COLUMNS, row))
            out.append(ExperimentRecord(
                experiment=vals["experiment"],
                beta_hz=float(vals["beta_hz"]),
                gamma=int(vals["gamma"]),
                estimator=vals["estimator"],
                mode=vals["mode"],
                snr_db=float(vals["snr_db"]) if vals["snr_db"] else None,
                metric=vals["metric"],
                empirical=float(vals["empirical"]) if vals["empirical"] else None,
                stderr=float(vals["stderr"]) if vals["stderr"] else None,
                closed_form=float(vals["closed_form"]) if vals["closed_form"] else None,
                approx=float(vals["approx"]) if vals["approx"] else None,
                trials=int(vals["trials"]),
                n=int(vals["n"]),
                n_cb=int(vals["n_cb"]),
                n_ct=int(vals["n_ct"]),
                seed=int(vals["seed"]),
            ))
        return out
