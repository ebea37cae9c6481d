"""Shared CSV access for the plot scripts.

The plots are pure views: they parse the harness CSVs, filter rows, and
hand series to matplotlib.  Nothing numeric is recomputed here, and the
``--dump-data`` option on every script emits exactly the plotted series
for downstream verification.
"""

import csv
import json

RESULTS_SCHEMA = "pnofdm-results-v1"
PN_TRACES_SCHEMA = "pnofdm-pn-traces-v1"


class PlotDataError(Exception):
    """Missing columns, wrong schema, or an empty filter result."""


def _float_or_none(text):
    return float(text) if text else None


def read_results(path):
    """Rows of a results CSV as dicts with typed fields."""
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# schema={RESULTS_SCHEMA}":
            raise PlotDataError(f"{path}: expected schema {RESULTS_SCHEMA}, got {first!r}")
        reader = csv.DictReader(fh)
        required = {"experiment", "beta_hz", "gamma", "estimator", "mode", "snr_db",
                    "metric", "empirical", "stderr", "closed_form", "approx"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise PlotDataError(f"{path}: missing column(s) {sorted(missing)}")
        rows = []
        for raw in reader:
            row = dict(raw)
            row["beta_hz"] = float(raw["beta_hz"])
            row["gamma"] = int(raw["gamma"])
            for key in ("snr_db", "empirical", "stderr", "closed_form", "approx"):
                row[key] = _float_or_none(raw[key])
            rows.append(row)
        return rows


def read_pn_traces(path):
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# schema={PN_TRACES_SCHEMA}":
            raise PlotDataError(f"{path}: expected schema {PN_TRACES_SCHEMA}, got {first!r}")
        reader = csv.DictReader(fh)
        required = {"beta_hz", "kind", "index", "x", "value"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise PlotDataError(f"{path}: missing column(s) {sorted(missing)}")
        rows = []
        for raw in reader:
            rows.append({
                "beta_hz": float(raw["beta_hz"]),
                "kind": raw["kind"],
                "index": int(raw["index"]),
                "x": float(raw["x"]),
                "value": float(raw["value"]),
            })
        return rows


def select(rows, **criteria):
    """Rows matching all equality criteria (None criteria are skipped)."""
    out = rows
    for key, wanted in criteria.items():
        if wanted is None:
            continue
        out = [r for r in out if r[key] == wanted]
    return out


def series_by_snr(rows, value_key):
    """(snr, value) pairs sorted by SNR, dropping empty values."""
    pairs = [(r["snr_db"], r[value_key]) for r in rows
             if r["snr_db"] is not None and r[value_key] is not None]
    return sorted(pairs)


def dump_series(path, series):
    """Write the exact plotted data as JSON for verification."""
    with open(path, "w") as fh:
        json.dump(series, fh, indent=1, sort_keys=True)


def parse_float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def parse_int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]
