"""Report emission: metrics JSON, z-score/bandwidth CSVs, and rendered figures."""

import json
import os

import numpy as np

from .evaluation import TrialAggregate


def _write_csv(path, header, rows, fmt):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for label, values in rows:
            fh.write(str(label) + "," + ",".join(fmt(v) for v in values) + "\n")


def emit_reports(agg: TrialAggregate, out_dir, render_figures: bool = True) -> list:
    """Write metrics.json, zscores.csv, mean_bandwidths.csv, bandwidth_boxplot.csv
    and (optionally) the matching figures. Returns the paths written."""
    if not agg.accuracies:
        raise ValueError("empty aggregate")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    metrics_path = os.path.join(out_dir, "metrics.json")
    with open(metrics_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(agg.to_dict(), fh, indent=2)
        fh.write("\n")
    written.append(metrics_path)

    # hardware-dependent; the only report file allowed to vary across runs
    timings_path = os.path.join(out_dir, "timings.json")
    with open(timings_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(agg.timings_dict(), fh, indent=2)
        fh.write("\n")
    written.append(timings_path)

    d = agg.mean_z_matrix.shape[1]
    dim_cols = [f"x{j + 1}" for j in range(d)]
    z_path = os.path.join(out_dir, "zscores.csv")
    _write_csv(z_path, ["class"] + dim_cols,
               zip(agg.class_labels, agg.mean_z_matrix), lambda v: f"{v:.6g}")
    written.append(z_path)

    bw_path = os.path.join(out_dir, "mean_bandwidths.csv")
    _write_csv(bw_path, ["class"] + dim_cols,
               zip(agg.class_labels, agg.mean_bw_matrix), lambda v: f"{v:.6g}")
    written.append(bw_path)

    box_path = os.path.join(out_dir, "bandwidth_boxplot.csv")
    with open(box_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("class,dimension,min,q1,median,q3,max\n")
        for yi, lab in enumerate(agg.class_labels):
            for j in range(d):
                stats = agg.bw_quartiles[yi, j]
                fh.write(f"{lab},{j + 1}," + ",".join(repr(float(v)) for v in stats) + "\n")
    written.append(box_path)

    # feature-selection matrices as JSON as well
    feat_path = os.path.join(out_dir, "features.json")
    with open(feat_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(
            {
                "class_labels": list(agg.class_labels),
                "z_scores": agg.mean_z_matrix.tolist(),
                "mean_bandwidths": agg.mean_bw_matrix.tolist(),
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    written.append(feat_path)

    if render_figures:
        written.extend(render_report_figures(agg, out_dir))
    return written


def render_report_figures(agg: TrialAggregate, out_dir) -> list:
    """Per-class bandwidth box plots and a z-score heat map as PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    written = []
    d = agg.mean_z_matrix.shape[1]

    for yi, lab in enumerate(agg.class_labels):
        fig, ax = plt.subplots(figsize=(max(6, d * 0.25), 4))
        stats = []
        for j in range(d):
            mn, q1, med, q3, mx = agg.bw_quartiles[yi, j]
            stats.append({"whislo": mn, "q1": q1, "med": med, "q3": q3,
                          "whishi": mx, "fliers": []})
        ax.bxp(stats, showfliers=False)
        ax.set_xlabel("dimension")
        ax.set_ylabel("mean selected bandwidth")
        ax.set_title(f"Class {lab}: mean selected bandwidths across trials")
        if d > 20:
            ax.set_xticks(range(1, d + 1, max(1, d // 20)))
        fig.tight_layout()
        path = os.path.join(fig_dir, f"bandwidth_boxplot_class_{lab}.png")
        fig.savefig(path, dpi=110, metadata={"Software": "rodeokde"})
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(max(6, d * 0.25), max(3, len(agg.class_labels) * 0.4)))
    vmax = float(np.abs(agg.mean_z_matrix).max()) or 1.0
    im = ax.imshow(agg.mean_z_matrix, cmap="RdBu", vmin=-vmax, vmax=vmax, aspect="auto")
    ax.set_xlabel("dimension")
    ax.set_ylabel("class")
    ax.set_yticks(range(len(agg.class_labels)), [str(v) for v in agg.class_labels])
    ax.set_title("z-scores of mean selected bandwidths")
    fig.colorbar(im, ax=ax, label="z-score")
    fig.tight_layout()
    path = os.path.join(fig_dir, "zscores_heatmap.png")
    fig.savefig(path, dpi=110, metadata={"Software": "rodeokde"})
    plt.close(fig)
    written.append(path)
    return written
