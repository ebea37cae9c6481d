#!/usr/bin/env python3
"""Oscillator figure: phase trajectories (time) and averaged spectrum
(frequency, dB) from the auxiliary pn_traces.csv."""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from csvdata import PlotDataError, dump_series, read_pn_traces, select


def build_parser():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", required=True, help="pn_traces.csv path")
    parser.add_argument("--out", required=True)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--dump-data", default=None)
    return parser


def collect_series(rows, args):
    betas = sorted({r["beta_hz"] for r in rows}) if args.beta is None else [args.beta]
    series = []
    for beta in betas:
        for kind in ("trace", "psd"):
            sub = sorted(select(rows, beta_hz=beta, kind=kind),
                         key=lambda r: r["index"])
            if not sub:
                continue
            series.append({
                "label": f"beta={beta:g} Hz",
                "kind": kind,
                "points": [(r["x"], r["value"]) for r in sub],
            })
    if not series:
        raise PlotDataError("filter matched no oscillator series")
    return series


def render(series, out_path):
    fig, (ax_t, ax_f) = plt.subplots(2, 1, figsize=(7.2, 7.0))
    for i, s in enumerate(series):
        xs, ys = zip(*s["points"])
        if s["kind"] == "trace":
            ax_t.plot([x * 1e6 for x in xs], ys, color=f"C{i % 10}", label=s["label"])
        else:
            ax_f.plot([x / 1e6 for x in xs], ys, color=f"C{i % 10}", label=s["label"])
    ax_t.set_xlabel("time (us)")
    ax_t.set_ylabel("phase (rad)")
    ax_t.set_title("Free-running oscillator phase trajectories")
    ax_t.grid(True, alpha=0.3)
    ax_t.legend(fontsize=8)
    ax_f.set_xlabel("frequency offset (MHz)")
    ax_f.set_ylabel("average spectral power (dB)")
    ax_f.set_title("Phase-noise spectrum (simulated)")
    ax_f.grid(True, alpha=0.3)
    ax_f.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    return fig


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        rows = read_pn_traces(args.csv)
        series = collect_series(rows, args)
    except (OSError, PlotDataError) as exc:
        print(f"plot_pn: {exc}", file=sys.stderr)
        return 1
    if args.dump_data:
        dump_series(args.dump_data, series)
    plt.close(render(series, args.out))
    print(f"plot_pn: wrote {args.out} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
