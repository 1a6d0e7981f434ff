"""Cell statistics and their aggregation.

A cell is one (size, task, family) configuration. Its mean and standard
error use every run in the cell; SE = sample std / sqrt(N). Cell means are
averaged with equal weight and their standard errors propagated as
sqrt(sum SE^2) / |C|.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import ParameterError
from ..tasks import ALL_TASKS
from .runner import RunRecord

CellKey = tuple[int, str, str]  # (size, task, family)


@dataclass(frozen=True)
class CellStat:
    size: int
    task: str
    family: str
    mean: float
    se: float
    n: int
    single_run: bool = False

    @property
    def key(self) -> CellKey:
        return (self.size, self.task, self.family)


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float
    cells: int


@dataclass
class AggregateReport:
    model: str
    mean: float
    se: float
    cells: int
    partial: bool = False
    missing: list[CellKey] = field(default_factory=list)
    per_task: dict[str, Estimate] = field(default_factory=dict)
    per_size: dict[int, dict[str, Estimate]] = field(default_factory=dict)
    soft_per_task: dict[str, Estimate] = field(default_factory=dict)
    total_cost: float = 0.0
    cost_per_repeat: float = 0.0
    input_tokens: int = 0
    output_tokens: int = 0
    runs: int = 0
    failures: int = 0


def mean_se(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error of the mean (sample std, N-1 denominator)."""
    n = len(values)
    if n == 0:
        raise ParameterError("no values")
    mu = math.fsum(values) / n
    if n == 1:
        return mu, 0.0
    var = math.fsum((x - mu) ** 2 for x in values) / (n - 1)
    return mu, math.sqrt(var) / math.sqrt(n)


def cell_stats(records: Iterable[RunRecord], metric: str = "solved") -> list[CellStat]:
    """Per-cell mean and SE over non-failed runs, in sorted key order."""
    groups: dict[CellKey, list[float]] = defaultdict(list)
    for r in records:
        if r.failed:
            continue
        groups[(r.size, r.task, r.family)].append(float(getattr(r, metric)))
    out = []
    for key in sorted(groups):
        mu, se = mean_se(groups[key])
        out.append(CellStat(*key, mean=mu, se=se, n=len(groups[key]),
                            single_run=len(groups[key]) == 1))
    return out


def combine(cells: Sequence[CellStat]) -> Estimate:
    """Equal-weight mean of cell means with propagated standard error."""
    c = len(cells)
    if c == 0:
        return Estimate(math.nan, math.nan, 0)
    mu = math.fsum(x.mean for x in cells) / c
    se = math.sqrt(math.fsum(x.se ** 2 for x in cells) / c ** 2)
    return Estimate(mu, se, c)


def expected_cells(sizes: Iterable[int], tasks: Iterable[str], families: Iterable[str]
                   ) -> set[CellKey]:
    return {(int(s), str(getattr(t, "value", t)), str(getattr(g, "value", g)))
            for s in sizes for t in tasks for g in families}


def task_order(tasks: Iterable[str]) -> list[str]:
    known = [t.value for t in ALL_TASKS]
    return sorted(set(tasks), key=lambda t: (known.index(t) if t in known else len(known), t))


def aggregate(cells: Sequence[CellStat], expected: set[CellKey] | None = None,
              allow_partial: bool = False, model: str = "",
              soft_cells: Sequence[CellStat] = ()) -> AggregateReport:
    """Roll cells up into one report; refuses missing cells unless ``allow_partial``."""
    present = {c.key for c in cells}
    missing = sorted(expected - present) if expected is not None else []
    if missing and not allow_partial:
        raise ParameterError(f"{len(missing)} configured cells have no runs, e.g. {missing[0]}")
    if not cells and not allow_partial:
        raise ParameterError("no cells to aggregate")
    total = combine(cells)
    report = AggregateReport(model, total.mean, total.se, total.cells,
                             partial=bool(missing) or not cells, missing=missing)
    for task in task_order(c.task for c in cells):
        report.per_task[task] = combine([c for c in cells if c.task == task])
    for size in sorted({c.size for c in cells}):
        in_size = [c for c in cells if c.size == size]
        report.per_size[size] = {task: combine([c for c in in_size if c.task == task])
                                 for task in task_order(c.task for c in in_size)}
    # soft scores are reported per task only, never averaged across tasks
    for task in task_order(c.task for c in soft_cells):
        report.soft_per_task[task] = combine([c for c in soft_cells if c.task == task])
    return report


def build_reports(records: Sequence[RunRecord], expected: set[CellKey] | None = None,
                  allow_partial: bool = False) -> list[AggregateReport]:
    """One report per model label, with cost and failure totals filled in."""
    reports = []
    for model in sorted({r.model for r in records}):
        mine = [r for r in records if r.model == model]
        report = aggregate(cell_stats(mine), expected, allow_partial, model,
                           soft_cells=cell_stats(mine, "soft_score"))
        report.runs = sum(1 for r in mine if not r.failed)
        report.failures = sum(1 for r in mine if r.failed)
        report.total_cost = math.fsum(r.cost for r in mine)
        report.input_tokens = sum(r.input_tokens for r in mine)
        report.output_tokens = sum(r.output_tokens for r in mine)
        repeats = len({r.repeat for r in mine}) or 1
        report.cost_per_repeat = report.total_cost / repeats
        reports.append(report)
    return reports
