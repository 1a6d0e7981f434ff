"""Figures, each written next to a JSON file holding the plotted numbers."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .stats import AggregateReport, task_order  # noqa: E402

log = logging.getLogger(__name__)


def pareto_front(points: Sequence[tuple[float, float]]) -> list[bool]:
    """Flags for (cost, score) points not dominated by a cheaper-or-equal, better-or-equal one."""
    flags = []
    for i, (c, s) in enumerate(points):
        dominated = any(c2 <= c and s2 >= s and (c2 < c or s2 > s)
                        for j, (c2, s2) in enumerate(points) if j != i)
        flags.append(not dominated)
    return flags


def _write(fig, data, out: Path, stem: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    (out / f"{stem}.json").write_text(json.dumps(data, indent=2, sort_keys=True))
    return path


def plot_score_vs_cost(reports: Sequence[AggregateReport], out: Path) -> Path | None:
    priced = [r for r in reports if r.total_cost > 0]
    if not priced:
        log.warning("no cost data; skipping the score-vs-cost plot")
        return None
    if len(priced) < len(reports):
        log.warning("skipping models without cost data: %s",
                    ", ".join(r.model for r in reports if r.total_cost <= 0))
    pts = [(r.cost_per_repeat, r.mean) for r in priced]
    front = pareto_front(pts)
    data = [{"model": r.model, "cost_per_repeat": r.cost_per_repeat, "score": r.mean,
             "se": r.se, "pareto": f} for r, f in zip(priced, front)]
    fig, ax = plt.subplots(figsize=(6, 4))
    for d in data:
        ax.errorbar(d["cost_per_repeat"], d["score"], yerr=d["se"], capsize=3,
                    marker="*" if d["pareto"] else "o", markersize=12 if d["pareto"] else 6)
        ax.annotate(d["model"], (d["cost_per_repeat"], d["score"]), fontsize=8,
                    xytext=(4, 4), textcoords="offset points")
    ax.set_xscale("log")
    ax.set_xlabel("API cost per repeat (USD)")
    ax.set_ylabel("Score")
    return _write(fig, data, out, "score_vs_cost")


def plot_size_breakdown(reports: Sequence[AggregateReport], out: Path) -> Path | None:
    bars = []
    for r in sorted(reports, key=lambda r: r.model):
        for size, per_task in sorted(r.per_size.items()):
            tasks = task_order(per_task)
            # each task contributes mean / |tasks| so the stack height is the size's score
            bars.append({"model": r.model, "size": size,
                         "segments": {t: per_task[t].mean / len(tasks) for t in tasks}})
    if not bars:
        return None
    tasks = task_order(t for b in bars for t in b["segments"])
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(bars)), 4))
    bottoms = [0.0] * len(bars)
    for task in tasks:
        heights = [b["segments"].get(task, 0.0) for b in bars]
        ax.bar(range(len(bars)), heights, bottom=bottoms, label=task)
        bottoms = [x + h for x, h in zip(bottoms, heights)]
    ax.set_xticks(range(len(bars)), [f"{b['model']}\nn={b['size']}" for b in bars], fontsize=7)
    ax.set_ylabel("Score")
    ax.legend(fontsize=7)
    return _write(fig, bars, out, "score_by_size")


def plot_scaling(reports: Sequence[AggregateReport], out: Path) -> Path | None:
    curves = []
    for r in sorted(reports, key=lambda r: r.model):
        sizes = sorted(r.per_size)
        if len(sizes) < 2:
            continue
        for task in task_order(t for s in sizes for t in r.per_size[s]):
            pts = [(s, r.per_size[s][task]) for s in sizes if task in r.per_size[s]]
            curves.append({"model": r.model, "task": task, "sizes": [s for s, _ in pts],
                           "mean": [e.mean for _, e in pts], "se": [e.se for _, e in pts]})
    if not curves:
        log.warning("fewer than two sizes; skipping the scaling plot")
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    for c in curves:
        ax.errorbar(c["sizes"], c["mean"], yerr=c["se"], marker="o", capsize=2,
                    label=f"{c['model']} {c['task']}" if len(reports) > 1 else c["task"])
    ax.set_xlabel("Number of agents")
    ax.set_ylabel("Solved fraction")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=7)
    return _write(fig, curves, out, "scaling")


def emit_plots(reports: Sequence[AggregateReport], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    made = [plot_score_vs_cost(reports, out), plot_size_breakdown(reports, out),
            plot_scaling(reports, out)]
    return [p for p in made if p is not None]
