"""Report emission: per-run JSON, campaign confusion matrix, channel plots."""

import json
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ..errors import AnalysisError

LOCATIONS = ("GPS", "IMU", "Actuator", "None")


def confusion_matrix(truth_pairs, inferred_pairs, labels=LOCATIONS):
    """counts[true][inferred] over location labels."""
    counts = {t: {i: 0 for i in labels} for t in labels}
    for truth, inferred in zip(truth_pairs, inferred_pairs):
        counts[truth][inferred] += 1
    return counts


def location_accuracy(index_runs: dict, reports: dict):
    """(overall accuracy, per-location dict) over runs present in both."""
    total = 0
    hits = 0
    per = {}
    for run_id, meta in index_runs.items():
        if run_id not in reports:
            continue
        truth = meta["location"]
        inferred = reports[run_id].location
        total += 1
        hits += int(truth == inferred)
        bucket = per.setdefault(truth, [0, 0])
        bucket[1] += 1
        bucket[0] += int(truth == inferred)
    if total == 0:
        raise AnalysisError("no overlapping runs between index and reports")
    return hits / total, {k: v[0] / v[1] for k, v in per.items()}


def emit_report(reports: dict, index: dict, out_dir, plots: bool = False,
                telemetry_loader=None) -> dict:
    """Write per-run report JSONs plus a campaign-level report.

    ``reports`` maps run id -> DamageReport; ``index`` is the campaign
    index produced by run_campaign.  Returns the campaign report dict.
    """
    if not reports:
        raise AnalysisError("no reports to emit")
    os.makedirs(out_dir, exist_ok=True)
    runs = index.get("runs", {})

    for run_id, report in sorted(reports.items()):
        doc = {"run_id": run_id, "report": report.as_dict()}
        if run_id in runs:
            doc["truth"] = {k: runs[run_id][k]
                            for k in ("target", "mode", "phase", "seed", "location")}
        with open(os.path.join(out_dir, f"{run_id}.report.json"), "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")

    overlap = [r for r in sorted(reports) if r in runs]
    campaign = {"n_runs": len(reports)}
    if overlap:
        truths = [runs[r]["location"] for r in overlap]
        inferred = [reports[r].location for r in overlap]
        acc, per = location_accuracy({r: runs[r] for r in overlap}, reports)
        campaign.update({
            "location_accuracy": acc,
            "per_location_accuracy": per,
            "confusion_matrix": confusion_matrix(truths, inferred),
            "mode_matches": sum(
                1 for r in overlap
                if (runs[r]["mode"] or "none") == (reports[r].mode or "none")),
        })
    with open(os.path.join(out_dir, "campaign_report.json"), "w") as fh:
        json.dump(campaign, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if plots and telemetry_loader is not None:
        for run_id in sorted(reports):
            try:
                df = telemetry_loader(run_id)
            except (OSError, KeyError):
                continue
            plot_run(df, os.path.join(out_dir, f"{run_id}.png"),
                     title=run_id)
    return campaign


def plot_run(df, path, title=""):
    """Four-panel time series of the externally visible channels."""
    t = df["t"].to_numpy(dtype=float)
    fig, axes = plt.subplots(2, 2, figsize=(11, 7), sharex=True)

    ax = axes[0][0]
    ax.plot(t, df["meas_alt"], lw=0.8, label="altitude [m]")
    ax.set_ylabel("altitude [m]")
    ax.legend(loc="best", fontsize=8)

    ax = axes[0][1]
    ax.plot(t, df["meas_gspeed"], lw=0.8, label="ground speed [m/s]")
    ax.plot(t, df["throttle_cmd"] * 50, lw=0.8, label="throttle cmd x50")
    ax.set_ylabel("speed [m/s]")
    ax.legend(loc="best", fontsize=8)

    ax = axes[1][0]
    for ch, style in (("meas_roll", "-"), ("meas_pitch", "--"), ("meas_yaw", ":")):
        ax.plot(t, np.degrees(df[ch]), style, lw=0.8, label=ch)
    ax.set_ylabel("attitude [deg]")
    ax.set_xlabel("t [s]")
    ax.legend(loc="best", fontsize=8)

    ax = axes[1][1]
    for ch in ("elevator", "aileron", "rudder"):
        ax.plot(t, np.degrees(df[f"cmd_{ch}"]), lw=0.6, label=f"cmd {ch}")
        ax.plot(t, np.degrees(df[f"act_{ch}"]), lw=0.6, ls="--", label=f"act {ch}")
    ax.set_ylabel("surface [deg]")
    ax.set_xlabel("t [s]")
    ax.legend(loc="best", fontsize=7, ncol=2)

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
