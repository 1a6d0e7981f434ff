"""Experiment configuration, execution, statistics, tables and plots."""

from .config import BackendSpec, ExperimentConfig, SuiteConfig, load_config
from .runner import RunRecord, load_records, reevaluate, run_experiment
from .stats import AggregateReport, CellStat, aggregate, build_reports, cell_stats

__all__ = [
    "AggregateReport",
    "BackendSpec",
    "CellStat",
    "ExperimentConfig",
    "RunRecord",
    "SuiteConfig",
    "aggregate",
    "build_reports",
    "cell_stats",
    "load_config",
    "load_records",
    "reevaluate",
    "run_experiment",
]
