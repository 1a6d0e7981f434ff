"""Experiment configuration: a YAML document plus a typed view of it.

Example::

    name: scripted-suite
    seed: 0
    suite: {sizes: [4, 8, 16], families: [SmallWorld, ScaleFree, Delaunay], per_cell: 3}
    tasks: [Coloring, VertexCover, Matching, LeaderElection, Consensus]
    backends:
      - {kind: scripted}
      - {kind: remote, label: gpt-4.1-mini, model: gpt-4.1-mini,
         base_url: "https://api.openai.com/v1", credential_env: OPENAI_API_KEY}
    repeats: 1
    budget_mode: benchmark        # or scaling (default for the scaling preset)
    rounds_override: {Coloring: n}   # integer, or "n" for the node count
    out_dir: runs/scripted-suite
    concurrency: 1                # runs in flight
    agent_concurrency: 1          # generations in flight within a round

Credentials are never part of the document: remote backends name the
environment variable that holds the key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..errors import ConfigError
from ..protocol import BudgetMode
from ..tasks import ALL_TASKS, TaskKind
from ..topology import ALL_FAMILIES, BENCHMARK_SIZES, DEFAULT_PER_CELL, SCALING_SIZES, GraphFamily

BACKEND_KINDS = ("scripted", "random", "remote")
_SECRET_KEYS = {"api_key", "apikey", "token", "secret", "password", "authorization"}


@dataclass
class SuiteConfig:
    sizes: list[int] = field(default_factory=lambda: list(BENCHMARK_SIZES))
    families: list[GraphFamily] = field(default_factory=lambda: list(ALL_FAMILIES))
    per_cell: int = DEFAULT_PER_CELL
    params: dict[str, dict[str, Any]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping | None) -> SuiteConfig:
        data = dict(data or {})
        preset = data.pop("preset", None)
        out = cls()
        if preset == "scaling":
            out.sizes = list(SCALING_SIZES)
        elif preset not in (None, "benchmark"):
            raise ConfigError(f"unknown suite preset {preset!r}")
        if "sizes" in data:
            out.sizes = [int(s) for s in data.pop("sizes")]
        if "families" in data:
            out.families = [GraphFamily.parse(f) for f in data.pop("families")]
        if "per_cell" in data:
            out.per_cell = int(data.pop("per_cell"))
        if "params" in data:
            out.params = {GraphFamily.parse(k).value: dict(v) for k, v in data.pop("params").items()}
        if data:
            raise ConfigError(f"unknown suite fields: {sorted(data)}")
        if out.per_cell < 1 or not out.sizes or not out.families:
            raise ConfigError("suite must have sizes, families and per_cell >= 1")
        return out

    def to_dict(self) -> dict:
        return {"sizes": list(self.sizes), "families": [f.value for f in self.families],
                "per_cell": self.per_cell, "params": self.params}


@dataclass
class BackendSpec:
    kind: str
    label: str
    seed: int = 0
    remote: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping) -> BackendSpec:
        data = dict(data)
        kind = data.pop("kind", None)
        if kind not in BACKEND_KINDS:
            raise ConfigError(f"backend kind must be one of {BACKEND_KINDS}, got {kind!r}")
        seed = int(data.pop("seed", 0))
        label = data.pop("label", None)
        if kind != "remote":
            if data:
                raise ConfigError(f"unknown fields for {kind} backend: {sorted(data)}")
            return cls(kind, label or kind, seed)
        if "model" not in data:
            raise ConfigError("remote backend needs 'model'")
        return cls(kind, label or str(data["model"]), seed, data)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "label": self.label, "seed": self.seed}
        out.update(self.remote)
        return out


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    seed: int = 0
    suite: SuiteConfig = field(default_factory=SuiteConfig)
    tasks: list[TaskKind] = field(default_factory=lambda: list(ALL_TASKS))
    backends: list[BackendSpec] = field(default_factory=lambda: [BackendSpec("scripted", "scripted")])
    repeats: int = 1
    budget_mode: BudgetMode = BudgetMode.BENCHMARK
    rounds_override: dict[str, int | str] = field(default_factory=dict)
    out_dir: str = "runs/experiment"
    concurrency: int = 1
    agent_concurrency: int = 1
    retry_limit: int = 2

    def rounds_for(self, task: TaskKind, n: int) -> int | None:
        value = self.rounds_override.get(task.value)
        if value is None:
            return None
        return n if value == "n" else int(value)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "seed": self.seed, "suite": self.suite.to_dict(),
            "tasks": [t.value for t in self.tasks],
            "backends": [b.to_dict() for b in self.backends],
            "repeats": self.repeats, "budget_mode": self.budget_mode.value,
            "rounds_override": dict(self.rounds_override), "out_dir": self.out_dir,
            "concurrency": self.concurrency, "agent_concurrency": self.agent_concurrency,
            "retry_limit": self.retry_limit,
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, data: Mapping) -> ExperimentConfig:
        _reject_secrets(data)
        data = dict(data)
        cfg = cls()
        cfg.name = str(data.pop("name", cfg.name))
        cfg.seed = int(data.pop("seed", cfg.seed))
        suite = data.pop("suite", None) or {}
        cfg.suite = SuiteConfig.from_dict(suite)
        if suite.get("preset") == "scaling":
            cfg.budget_mode = BudgetMode.SCALING
        if "tasks" in data:
            cfg.tasks = [TaskKind.parse(t) for t in data.pop("tasks")]
        if "backends" in data:
            cfg.backends = [BackendSpec.from_dict(b) for b in data.pop("backends")]
        if "backend" in data:
            cfg.backends = [BackendSpec.from_dict(data.pop("backend"))]
        cfg.repeats = int(data.pop("repeats", cfg.repeats))
        try:
            cfg.budget_mode = BudgetMode(data.pop("budget_mode", cfg.budget_mode.value))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        overrides = data.pop("rounds_override", None) or {}
        cfg.rounds_override = {}
        for task, value in overrides.items():
            if value != "n" and (not isinstance(value, int) or value < 1):
                raise ConfigError(f"rounds_override for {task} must be a positive integer or 'n'")
            cfg.rounds_override[TaskKind.parse(task).value] = value
        cfg.out_dir = str(data.pop("out_dir", f"runs/{cfg.name}"))
        cfg.concurrency = int(data.pop("concurrency", cfg.concurrency))
        cfg.agent_concurrency = int(data.pop("agent_concurrency", cfg.agent_concurrency))
        cfg.retry_limit = int(data.pop("retry_limit", cfg.retry_limit))
        if data:
            raise ConfigError(f"unknown config fields: {sorted(data)}")
        if cfg.repeats < 1 or cfg.concurrency < 1 or cfg.agent_concurrency < 1:
            raise ConfigError("repeats and concurrency caps must be >= 1")
        labels = [b.label for b in cfg.backends]
        if len(set(labels)) != len(labels):
            raise ConfigError("backend labels must be unique")
        return cfg

    @classmethod
    def from_yaml(cls, text: str) -> ExperimentConfig:
        data = yaml.safe_load(text) or {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        return cls.from_dict(data)


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.from_yaml(Path(path).read_text())


def _reject_secrets(node, where="config"):
    if isinstance(node, Mapping):
        for key, value in node.items():
            if str(key).lower() in _SECRET_KEYS:
                raise ConfigError(f"{where}.{key}: credentials must come from environment "
                                  "variables (use credential_env)")
            _reject_secrets(value, f"{where}.{key}")
    elif isinstance(node, list):
        for i, item in enumerate(node):
            _reject_secrets(item, f"{where}[{i}]")
