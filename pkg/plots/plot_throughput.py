#!/usr/bin/env python3
"""Throughput-versus-SNR trade-off figure (linear y-axis).

One curve per (beta, gamma, estimator); the legend carries each curve's
pilot overhead so the low-SNR/high-SNR ordering flip is visible.
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
    thp = select(rows, experiment="throughput", metric="throughput_bps")
    overhead = {r["gamma"]: r["closed_form"]
                for r in select(rows, experiment="throughput",
                                metric="pilot_overhead")}
    betas = sorted({r["beta_hz"] for r in thp}) if args.beta is None else [args.beta]
    series = []
    for beta in betas:
        sub = select(thp, beta_hz=beta)
        gammas = args.gammas or sorted({r["gamma"] for r in sub})
        kinds = ([args.estimator] if args.estimator
                 else sorted({r["estimator"] for r in sub}))
        for gamma in gammas:
            for kind in kinds:
                rows_g = select(sub, gamma=gamma, estimator=kind)
                if not rows_g:
                    continue
                rho = overhead.get(gamma)
                label = f"beta={beta:g} gamma={gamma} {kind}"
                if rho is not None:
                    label += f" (overhead {100 * rho:.2f}%)"
                series.append({
                    "label": label,
                    "empirical": series_by_snr(rows_g, "empirical"),
                    "stderr": series_by_snr(rows_g, "stderr"),
                    "overhead": rho,
                })
    if not series:
        raise PlotDataError("filter matched no throughput series")
    return series


def render(series, out_path):
    fig, ax = plt.subplots(figsize=(7.2, 5.0))
    for i, s in enumerate(series):
        if not s["empirical"]:
            continue
        xs, ys = zip(*s["empirical"])
        ys_mbit = [y / 1e6 for y in ys]
        errs = dict(s["stderr"])
        yerr = [(errs.get(x) or 0.0) / 1e6 for x in xs]
        ax.errorbar(xs, ys_mbit, yerr=yerr, fmt="o-", color=f"C{i % 10}",
                    markersize=4, capsize=2, label=s["label"])
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Throughput (Mbit/s)")
    ax.set_title("Throughput vs pilot-overhead trade-off")
    ax.grid(True, alpha=0.3)
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
        print(f"plot_throughput: {exc}", file=sys.stderr)
        return 1
    if args.dump_data:
        dump_series(args.dump_data, series)
    plt.close(render(series, args.out))
    print(f"plot_throughput: wrote {args.out} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
