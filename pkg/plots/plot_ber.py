#!/usr/bin/env python3
"""BER-versus-SNR figure with benchmark curves.

Proposed-chain curves in blue tones, genie PN compensation (np_perfect)
in red, and the no-PN reference in black, matching the harness modes.
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from csvdata import PlotDataError, dump_series, parse_int_list, read_results, select, series_by_snr


def build_parser():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--gammas", type=parse_int_list, default=None)
    parser.add_argument("--estimator", default=None)
    parser.add_argument("--dump-data", default=None)
    return parser


def collect_series(rows, args):
    rows = select(rows, experiment="ber", metric="ber")
    betas = sorted({r["beta_hz"] for r in rows}) if args.beta is None else [args.beta]
    series = []
    for beta in betas:
        sub = select(rows, beta_hz=beta)
        gammas = args.gammas or sorted({r["gamma"] for r in sub})
        for mode in ("proposed", "np_perfect", "no_pn"):
            mode_rows = select(sub, mode=mode)
            if mode == "no_pn":
                groups = [(None, mode_rows)]
            else:
                kind = args.estimator
                groups = [(g, select(mode_rows, gamma=g, estimator=kind))
                          for g in gammas]
            for gamma, rows_g in groups:
                if not rows_g:
                    continue
                label = f"beta={beta:g} {mode}" + ("" if gamma is None else f" gamma={gamma}")
                series.append({
                    "label": label,
                    "mode": mode,
                    "empirical": series_by_snr(rows_g, "empirical"),
                    "stderr": series_by_snr(rows_g, "stderr"),
                })
    if not series:
        raise PlotDataError("filter matched no BER series")
    return series


def render(series, out_path):
    fig, ax = plt.subplots(figsize=(7.2, 5.0))
    counters = {"proposed": 0, "np_perfect": 0, "no_pn": 0}
    shade = {"proposed": plt.cm.Blues, "np_perfect": plt.cm.Reds,
             "no_pn": plt.cm.Greys}
    counts = {m: max(1, sum(s["mode"] == m for s in series)) for m in counters}
    for s in series:
        mode = s["mode"]
        idx = counters[mode]
        counters[mode] += 1
        color = shade[mode](0.45 + 0.5 * idx / counts[mode])
        marker = {"proposed": "o", "np_perfect": "s", "no_pn": "^"}[mode]
        style = {"proposed": "-", "np_perfect": "--", "no_pn": "-"}[mode]
        if not s["empirical"]:
            continue
        xs, ys = zip(*s["empirical"])
        errs = dict(s["stderr"])
        yerr = [errs.get(x) or 0.0 for x in xs]
        ax.errorbar(xs, ys, yerr=yerr, fmt=marker, linestyle=style, color=color,
                    markersize=4, capsize=2, label=s["label"])
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    ax.set_title("Uncoded QAM BER: proposed chain vs benchmarks")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    return fig


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        rows = read_results(args.csv)
        series = collect_series(rows, args)
    except (OSError, PlotDataError) as exc:
        print(f"plot_ber: {exc}", file=sys.stderr)
        return 1
    if args.dump_data:
        dump_series(args.dump_data, series)
    plt.close(render(series, args.out))
    print(f"plot_ber: wrote {args.out} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
