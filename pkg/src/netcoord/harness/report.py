"""Tables of aggregate results: plain text, delimited (CSV) and markdown."""

from __future__ import annotations

import csv
import io
import math
from typing import Sequence

from ..errors import ParameterError
from .stats import AggregateReport, Estimate, task_order

FORMATS = ("text", "delimited", "markdown")
MISSING = "-"


def fmt_estimate(est: Estimate | None, digits: int = 2) -> str:
    if est is None or est.cells == 0 or math.isnan(est.mean):
        return MISSING
    return f"{est.mean:.{digits}f} ({est.se:.{digits}f})"


def score_rows(reports: Sequence[AggregateReport], digits: int = 2) -> list[list[str]]:
    """Header plus one row per model: per-task solved rate, then the aggregate."""
    tasks = task_order(t for r in reports for t in r.per_task)
    rows = [["Model", *tasks, "Score"]]
    for r in sorted(reports, key=lambda r: r.model):
        overall = Estimate(r.mean, r.se, r.cells)
        rows.append([r.model, *(fmt_estimate(r.per_task.get(t), digits) for t in tasks),
                     fmt_estimate(overall, digits)])
    return rows


def size_rows(reports: Sequence[AggregateReport], digits: int = 2) -> list[list[str]]:
    tasks = task_order(t for r in reports for s in r.per_size.values() for t in s)
    rows = [["Model", "Size", *tasks]]
    for r in sorted(reports, key=lambda r: r.model):
        for size, per_task in sorted(r.per_size.items()):
            rows.append([r.model, str(size), *(fmt_estimate(per_task.get(t), digits) for t in tasks)])
    return rows


def soft_rows(reports: Sequence[AggregateReport], digits: int = 2) -> list[list[str]]:
    tasks = task_order(t for r in reports for t in r.soft_per_task)
    rows = [["Model", *tasks]]
    for r in sorted(reports, key=lambda r: r.model):
        rows.append([r.model, *(fmt_estimate(r.soft_per_task.get(t), digits) for t in tasks)])
    return rows


def cost_rows(reports: Sequence[AggregateReport]) -> list[list[str]]:
    rows = [["Model", "Runs", "Failures", "InputTokens", "OutputTokens", "Cost", "CostPerRepeat"]]
    for r in sorted(reports, key=lambda r: r.model):
        rows.append([r.model, str(r.runs), str(r.failures), str(r.input_tokens),
                     str(r.output_tokens), f"{r.total_cost:.4f}", f"{r.cost_per_repeat:.4f}"])
    return rows


def render(rows: list[list[str]], fmt: str) -> str:
    if fmt == "text":
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"
    if fmt == "delimited":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(rows[0]) + " |",
                 "|" + "|".join("---" for _ in rows[0]) + "|"]
        lines += ["| " + " | ".join(row) + " |" for row in rows[1:]]
        return "\n".join(lines) + "\n"
    raise ParameterError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def emit_report(reports: Sequence[AggregateReport], fmt: str = "text", digits: int = 2) -> str:
    """Main results table: one row per model, one column per task plus the aggregate."""
    return render(score_rows(reports, digits), fmt)


def emit_full_report(reports: Sequence[AggregateReport], fmt: str = "text", digits: int = 2) -> str:
    sections = [("Solved fraction (SE)", score_rows(reports, digits)),
                ("By network size", size_rows(reports, digits)),
                ("Soft score per task (SE)", soft_rows(reports, digits)),
                ("Usage", cost_rows(reports))]
    parts = []
    for title, rows in sections:
        heading = {"markdown": f"### {title}\n\n", "text": f"{title}\n\n",
                   "delimited": f"# {title}\n"}[fmt]
        parts.append(heading + render(rows, fmt))
    return "\n".join(parts)


def parse_delimited(text: str) -> list[list[str]]:
    return [row for row in csv.reader(io.StringIO(text)) if row and not row[0].startswith("#")]


def parse_markdown(text: str) -> list[list[str]]:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line.startswith("|") or set(line) <= set("|-: "):
            continue
        rows.append([c.strip() for c in line.strip("|").split("|")])
    return rows


def parse_cell(cell: str) -> tuple[float, float] | None:
    if cell == MISSING:
        return None
    mean, se = cell.split(" (")
    return float(mean), float(se.rstrip(")"))
