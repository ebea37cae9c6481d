#!/usr/bin/env python3
"""NMSE-versus-SNR figure: empirical points with error bars, closed-form
lines, and floor asymptotes as horizontal dashes.

Works on both nmse_pnac.csv and nmse_ifc.csv (pick with --experiment).
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from csvdata import PlotDataError, dump_series, parse_int_list, read_results, select, series_by_snr

METRIC = {"nmse-pnac": ("nmse_pnac", "nmse_pnac_floor"),
          "nmse-ifc": ("nmse_ifc", "nmse_ifc_floor")}


def build_parser():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", required=True)
    parser.add_argument("--out", required=True, help="output image (png/svg/pdf)")
    parser.add_argument("--experiment", choices=sorted(METRIC), default=None,
                        help="defaults to whatever the CSV contains")
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--gammas", type=parse_int_list, default=None,
                        help="comma-separated gamma filter")
    parser.add_argument("--estimators", default=None,
                        help="comma-separated estimator filter (ls,lmmse)")
    parser.add_argument("--dump-data", default=None,
                        help="write the plotted series as JSON")
    return parser


def collect_series(rows, args):
    experiments = {r["experiment"] for r in rows}
    experiment = args.experiment or (sorted(experiments)[0] if experiments else None)
    if experiment not in METRIC:
        raise PlotDataError(f"no NMSE experiment rows found (saw {sorted(experiments)})")
    metric, floor_metric = METRIC[experiment]
    betas = sorted({r["beta_hz"] for r in rows}) if args.beta is None else [args.beta]
    gammas = args.gammas or sorted({r["gamma"] for r in rows})
    kinds = (args.estimators.split(",") if args.estimators
             else sorted({r["estimator"] for r in rows if r["estimator"] != "none"}))
    series = []
    for beta in betas:
        for gamma in gammas:
            for kind in kinds:
                base = select(rows, experiment=experiment, beta_hz=beta,
                              gamma=gamma, estimator=kind)
                points = select(base, metric=metric)
                if not points:
                    continue
                label = f"beta={beta:g} gamma={gamma} {kind}"
                floors = select(base, metric=floor_metric)
                series.append({
                    "label": label,
                    "empirical": series_by_snr(points, "empirical"),
                    "stderr": series_by_snr(points, "stderr"),
                    "closed_form": series_by_snr(points, "closed_form"),
                    "approx": series_by_snr(points, "approx"),
                    "floor": floors[0]["closed_form"] if floors else None,
                })
    if not series:
        raise PlotDataError("filter matched no data series")
    return series


def render(series, out_path, title):
    fig, ax = plt.subplots(figsize=(7.2, 5.0))
    for i, s in enumerate(series):
        color = f"C{i % 10}"
        if s["closed_form"]:
            xs, ys = zip(*s["closed_form"])
            ax.plot(xs, ys, "-", color=color, linewidth=1.2)
        if s["empirical"]:
            xs, ys = zip(*s["empirical"])
            errs = dict(s["stderr"])
            yerr = [errs.get(x) or 0.0 for x in xs]
            ax.errorbar(xs, ys, yerr=yerr, fmt="o", color=color, markersize=4,
                        capsize=2, linestyle="none", label=s["label"])
        if s["floor"]:
            ax.axhline(s["floor"], color=color, linestyle="--", linewidth=0.9,
                       alpha=0.7)
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("NMSE")
    ax.set_title(title)
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
        print(f"plot_nmse: {exc}", file=sys.stderr)
        return 1
    if args.dump_data:
        dump_series(args.dump_data, series)
    plt.close(render(series, args.out,
                     "Estimator NMSE vs SNR (markers: simulated, "
                     "lines: closed form, dashes: floors)"))
    print(f"plot_nmse: wrote {args.out} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
