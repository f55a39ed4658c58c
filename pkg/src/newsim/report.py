"""Rendering of evaluation results: text tables, CSV exports, and PNG figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .augment import DistributionReport
from .evaluation import EvalReport, SeriousMistake

# Strip the software tag so identical runs produce identical PNG bytes.
_PNG_META = {"Software": None}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return path


def render_text_table(report: EvalReport) -> str:
    lines = [
        f"overall pearson: {report.overall_pearson:.5f}  (n={report.n})",
        "",
        f"{'languages':<12} {'pearson':>9} {'n':>6}  kind",
        "-" * 38,
    ]
    for (a, b), (r, n) in sorted(report.per_lang.items()):
        kind = "mono" if a == b else "cross"
        lines.append(f"{a + '-' + b:<12} {r:>9.5f} {n:>6}  {kind}")
    for (a, b), reason in sorted(report.flagged.items()):
        lines.append(f"{a + '-' + b:<12} {'--':>9} {'':>6}  skipped: {reason}")
    lines.append("-" * 38)
    if report.mono_avg is not None:
        lines.append(f"mono average:  {report.mono_avg:.5f}")
    if report.cross_avg is not None:
        lines.append(f"cross average: {report.cross_avg:.5f}")
    return "\n".join(lines) + "\n"


def write_eval_outputs(report: EvalReport, out_dir: str | Path) -> dict[str, Path]:
    """report.json, report.txt and per_language.csv under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    txt_path = out_dir / "report.txt"
    txt_path.write_text(render_text_table(report), encoding="utf-8")
    csv_path = out_dir / "per_language.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("lang1", "lang2", "pearson", "n", "mono"))
        for (a, b), (r, n) in sorted(report.per_lang.items()):
            writer.writerow((a, b, repr(r), n, int(a == b)))
    return {"json": json_path, "txt": txt_path, "csv": csv_path}


def write_mistakes_csv(mistakes: Sequence[SeriousMistake], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("pair_id", "true_raw", "predicted_raw", "difference"))
        for m in mistakes:
            writer.writerow((m.pair_id, repr(m.true_raw), repr(m.predicted_raw),
                             repr(m.difference)))
    return path


def save_per_language_chart(report: EvalReport, path: str | Path) -> Path:
    """Bar chart of per-language-pair correlations, mono and cross colored."""
    items = sorted(report.per_lang.items())
    labels = [f"{a}-{b}" for (a, b), _ in items]
    values = [r for _, (r, _) in items]
    colors = ["#4878a8" if a == b else "#d1905a" for (a, b), _ in items]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(items) + 1.5), 3.2))
    ax.bar(range(len(items)), values, color=colors)
    ax.set_xticks(range(len(items)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("pearson")
    ax.set_ylim(min([0.0, *values]), 1.0)
    ax.set_title("correlation by language pair")
    fig.tight_layout()
    return _save(fig, path)


def save_scatter(labels: Sequence[float], preds: Sequence[float],
                 path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(3.6, 3.6))
    ax.scatter(labels, preds, s=6, alpha=0.4, color="#4878a8", linewidths=0)
    ax.plot([0, 1], [0, 1], color="#999999", linewidth=0.8)
    ax.set_xlabel("label")
    ax.set_ylabel("prediction")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    return _save(fig, path)


def save_histogram(dist: DistributionReport, path: str | Path,
                   title: str = "label distribution") -> Path:
    edges = [i / dist.bins for i in range(dist.bins)]
    width = 1.0 / dist.bins
    fig, ax = plt.subplots(figsize=(4.0, 2.8))
    ax.bar(edges, dist.counts, width=width * 0.92, align="edge", color="#4878a8")
    ax.set_xlabel("pseudo label")
    ax.set_ylabel("count")
    ax.set_title(f"{title} (entropy {dist.entropy:.3f})")
    fig.tight_layout()
    return _save(fig, path)


def write_histogram_csv(dist: DistributionReport, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("bin_low", "bin_high", "count"))
        for i, count in enumerate(dist.counts):
            writer.writerow((repr(i / dist.bins), repr((i + 1) / dist.bins), count))
    return path


def save_loss_curve(losses: Sequence[float], path: str | Path,
                    title: str = "training loss") -> Path:
    fig, ax = plt.subplots(figsize=(4.0, 2.8))
    ax.plot(range(1, len(losses) + 1), losses, marker="o", markersize=3,
            color="#4878a8")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mse")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def write_loss_csv(losses: Sequence[float], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("epoch", "loss"))
        for i, loss in enumerate(losses, start=1):
            writer.writerow((i, repr(loss)))
    return path
