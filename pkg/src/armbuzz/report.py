"""Cross-run aggregation: comparison tables (CSV) and summary figures (PNG).

The ``report`` CLI subcommand feeds protocol-report JSON documents through
these helpers to produce a flat comparison table, an aggregate per-bin
table, and matplotlib renderings of the headline results (total load by
feedback condition, per-bin visit fractions, per-bin summed load).
"""

from __future__ import annotations

import csv
import json
import statistics
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import ConfigError
from .harness import ProtocolResult

CONDITION_ORDER = ("no_feedback", "reactive", "predictive", "training")


def write_protocol_outputs(result: ProtocolResult, out_dir: str | Path) -> None:
    """Write one protocol run's report.json and per_bin.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(result.report.as_dict(), indent=2) + "\n", encoding="utf-8")
    with (out / "per_bin.csv").open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["task", "bin", "visits", "visit_fraction", "summed_load"])
        for task in CONDITION_ORDER:
            m = result.report.metrics[task]
            for b in range(len(m.per_bin_visits)):
                writer.writerow([task, b, m.per_bin_visits[b],
                                 m.per_bin_visit_fraction[b], m.per_bin_summed_load[b]])


def load_report_documents(paths: list[str | Path]) -> list[dict]:
    """Load report.json documents; directory arguments are searched recursively."""
    docs = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            found = sorted(p.rglob("report.json"))
            if not found:
                raise ConfigError(f"no report.json found under {p}")
            docs.extend(json.loads(f.read_text(encoding="utf-8")) for f in found)
        elif p.is_file():
            docs.append(json.loads(p.read_text(encoding="utf-8")))
        else:
            raise ConfigError(f"no such report file or directory: {p}")
    return docs


def write_comparison_csv(docs: list[dict], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["seed", "task", "total_summed_load",
                         "wall_contact_count", "median_feedback_lead_ms"])
        for doc in docs:
            for task in CONDITION_ORDER:
                m = doc["metrics"][task]
                writer.writerow([doc["seed"], task, m["total_summed_load"],
                                 m["wall_contact_count"], m["median_feedback_lead_ms"]])


def _mean_per_bin(docs: list[dict], task: str, key: str) -> list[float]:
    rows = [doc["metrics"][task][key] for doc in docs]
    return [statistics.fmean(col) for col in zip(*rows)]


def write_aggregate_per_bin_csv(docs: list[dict], path: str | Path) -> None:
    num_bins = len(docs[0]["metrics"]["training"]["per_bin_visits"])
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["task", "bin", "mean_visit_fraction", "mean_summed_load"])
        for task in CONDITION_ORDER:
            fractions = _mean_per_bin(docs, task, "per_bin_visit_fraction")
            loads = _mean_per_bin(docs, task, "per_bin_summed_load")
            for b in range(num_bins):
                writer.writerow([task, b, fractions[b], loads[b]])


_LABELS = {
    "no_feedback": "no feedback",
    "reactive": "reactive",
    "predictive": "predictive",
    "training": "training",
}


def render_total_load_figure(docs: list[dict], path: str | Path) -> None:
    means = [statistics.fmean(d["total_loads"][task] for d in docs)
             for task in CONDITION_ORDER]
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = range(len(CONDITION_ORDER))
    ax.bar(xs, means, color=["0.2", "tab:olive", "tab:green", "0.7"])
    for i, task in enumerate(CONDITION_ORDER):
        seeds = [d["total_loads"][task] for d in docs]
        ax.plot([i] * len(seeds), seeds, "k.", alpha=0.5, markersize=4)
    ax.set_xticks(list(xs))
    ax.set_xticklabels([_LABELS[t] for t in CONDITION_ORDER])
    ax.set_ylabel("summed load over trial")
    ax.set_title(f"Total summed load by feedback condition ({len(docs)} seeds)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _render_per_bin(docs: list[dict], key: str, ylabel: str, title: str,
                    path: str | Path) -> None:
    num_bins = len(docs[0]["metrics"]["training"]["per_bin_visits"])
    xs = list(range(num_bins))
    fig, ax = plt.subplots(figsize=(8, 4))
    width = 0.42
    reactive = _mean_per_bin(docs, "reactive", key)
    predictive = _mean_per_bin(docs, "predictive", key)
    ax.bar([x - width / 2 for x in xs], reactive, width, label="reactive",
           color="tab:olive")
    ax.bar([x + width / 2 for x in xs], predictive, width, label="predictive",
           color="tab:green")
    for task, style in (("no_feedback", "k:"), ("training", "0.6")):
        ax.plot(xs, _mean_per_bin(docs, task, key), style,
                label=_LABELS[task], linewidth=1)
    ax.set_xlabel("position bin")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_report(docs: list[dict], out_dir: str | Path) -> list[Path]:
    """Write the comparison tables and figures; returns the created files."""
    if not docs:
        raise ConfigError("no report documents to aggregate")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    created = [
        out / "comparison.csv",
        out / "per_bin_aggregate.csv",
        out / "total_load_by_condition.png",
        out / "bin_visit_fraction.png",
        out / "bin_summed_load.png",
    ]
    write_comparison_csv(docs, created[0])
    write_aggregate_per_bin_csv(docs, created[1])
    render_total_load_figure(docs, created[2])
    _render_per_bin(docs, "per_bin_visit_fraction", "fraction of ticks",
                    "Visit fraction per position bin", created[3])
    _render_per_bin(docs, "per_bin_summed_load", "summed load",
                    "Summed load per position bin", created[4])
    return created
