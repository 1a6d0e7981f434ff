"""Run experiments: one run per (backend, task, topology, repeat), persisted as it goes.

Layout of an experiment directory::

    config.yaml            snapshot of the resolved config
    topologies/<ref>.txt   every topology used
    transcripts/<run>.jsonl
    records.jsonl          append-only, one schema-versioned record per run
    timings.jsonl          wall time per run, kept apart so records stay reproducible
"""

from __future__ import annotations

import json
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Iterator

import httpx

from ..agents import RandomBaselineAgent, RemoteModelAgent, RemoteModelConfig, Usage
from ..agents.scripted import scripted_agent
from ..errors import ConfigError, RunFailedError
from ..protocol import (ProtocolConfig, RunTranscript, answers_from_transcript,
                        collect_final_answers, compute_round_budget, name_topology, run_rounds)
from ..seeding import derive_seed
from ..tasks import TaskKind, TaskSpec
from ..topology import SuiteEntry, Topology, iter_suite
from .config import BackendSpec, ExperimentConfig

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
RECORDS_FILE = "records.jsonl"
TIMINGS_FILE = "timings.jsonl"


@dataclass
class RunRecord:
    run_id: str
    model: str
    task: str
    topology_ref: str
    size: int
    family: str
    instance: int
    repeat: int
    rounds: int
    soft_score: float
    solved: int
    input_tokens: int = 0
    output_tokens: int = 0
    cost: float = 0.0
    retries: int = 0
    degraded: int = 0
    failed: bool = False
    failure: str | None = None
    schema: int = SCHEMA_VERSION
    wall_time: float | None = None

    @property
    def key(self) -> tuple:
        return (self.model, self.size, self.task, self.family, self.instance, self.repeat)

    @property
    def excluded(self) -> bool:
        return self.failed

    def to_json(self) -> str:
        data = asdict(self)
        data.pop("wall_time")
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> RunRecord:
        data = json.loads(line)
        if data.get("schema") != SCHEMA_VERSION:
            raise ConfigError(f"unsupported record schema {data.get('schema')!r}")
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


def load_records(out_dir: str | Path) -> list[RunRecord]:
    """Records of an experiment; a later record for the same key supersedes earlier ones."""
    path = Path(out_dir) / RECORDS_FILE
    if not path.exists():
        return []
    latest: dict[tuple, RunRecord] = {}
    for line in path.read_text().splitlines():
        if line.strip():
            rec = RunRecord.from_json(line)
            latest.pop(rec.key, None)
            latest[rec.key] = rec
    timings = Path(out_dir) / TIMINGS_FILE
    if timings.exists():
        wall = {}
        for line in timings.read_text().splitlines():
            if line.strip():
                item = json.loads(line)
                wall[item["run_id"]] = item["wall_time"]
        for rec in latest.values():
            rec.wall_time = wall.get(rec.run_id)
    return list(latest.values())


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


@dataclass(frozen=True)
class Job:
    backend: BackendSpec
    task: TaskKind
    entry: SuiteEntry
    repeat: int

    @property
    def key(self) -> tuple:
        return (self.backend.label, self.entry.size, self.task.value,
                self.entry.family.value, self.entry.instance, self.repeat)

    @property
    def run_id(self) -> str:
        return "__".join([_slug(self.backend.label), self.task.value,
                          self.entry.topology.ref, f"j{self.repeat}"])


def plan_jobs(cfg: ExperimentConfig) -> list[Job]:
    entries = list(iter_suite(cfg.suite.sizes, cfg.suite.families, cfg.suite.per_cell,
                              cfg.seed, cfg.suite.params or None))
    return [Job(b, task, e, j)
            for b in cfg.backends for task in cfg.tasks for e in entries
            for j in range(cfg.repeats)]


def labelled(t: Topology) -> Topology:
    # names depend on the topology seed only, so they are stable across repeats
    return name_topology(t, seed=t.seed)


class BackendFactory:
    """Builds one backend per agent for a run; remote backends share one HTTP client."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self._clients: dict[str, httpx.Client] = {}
        for spec in cfg.backends:
            if spec.kind == "remote":
                rcfg = self.remote_config(spec)
                # fail at startup rather than mid-experiment
                RemoteModelAgent(rcfg, client=httpx.Client()).close()
                self._clients[spec.label] = httpx.Client(timeout=rcfg.timeout)

    @staticmethod
    def remote_config(spec: BackendSpec) -> RemoteModelConfig:
        return RemoteModelConfig.from_dict(spec.remote)

    def build(self, job: Job, names: Iterable[str], usage: Usage) -> dict:
        spec = job.backend
        base = derive_seed(self.cfg.seed, spec.seed, job.task.value,
                           job.entry.topology.ref, job.repeat)
        agents = {}
        for name in names:
            seed = derive_seed(base, name)
            if spec.kind == "scripted":
                agents[name] = scripted_agent(job.task, seed)
            elif spec.kind == "random":
                agents[name] = RandomBaselineAgent(seed)
            else:
                agents[name] = RemoteModelAgent(self.remote_config(spec), usage,
                                                client=self._clients[spec.label])
        return agents

    def close(self):
        for client in self._clients.values():
            client.close()


def execute_job(job: Job, cfg: ExperimentConfig, factory: BackendFactory
                ) -> tuple[RunRecord, RunTranscript | None]:
    t = labelled(job.entry.topology)
    spec = TaskSpec.for_topology(job.task, t)
    rounds = cfg.rounds_for(job.task, t.n) or compute_round_budget(job.task, t, cfg.budget_mode)
    usage = Usage()
    record = RunRecord(job.run_id, job.backend.label, job.task.value, t.ref, job.entry.size,
                       job.entry.family.value, job.entry.instance, job.repeat, rounds, 0.0, 0)
    pconf = ProtocolConfig(retry_limit=cfg.retry_limit, max_workers=cfg.agent_concurrency)
    start = time.perf_counter()
    transcript = None
    try:
        agents = factory.build(job, t.names(), usage)
        transcript = run_rounds(t, agents, spec, rounds, job.run_id, pconf)
        answers = collect_final_answers(transcript, spec, agents, pconf)
        ev = spec.evaluate(t, answers)
        record.soft_score = float(ev.soft_score)
        record.solved = int(ev.solved)
        record.retries = sum(1 for e in transcript.events if e.event_kind == "retry")
        record.degraded = len(transcript.degraded)
    except RunFailedError as exc:
        log.error("run %s failed: %s", job.run_id, exc)
        record.failed = True
        record.failure = str(exc)
    usage_now = usage.snapshot()
    record.input_tokens = usage_now["input_tokens"]
    record.output_tokens = usage_now["output_tokens"]
    record.cost = usage_now["cost"]
    record.wall_time = time.perf_counter() - start
    return record, transcript


def iter_experiment(cfg: ExperimentConfig, resume: bool = True) -> Iterator[RunRecord]:
    out = Path(cfg.out_dir)
    (out / "topologies").mkdir(parents=True, exist_ok=True)
    (out / "transcripts").mkdir(exist_ok=True)
    (out / "config.yaml").write_text(cfg.to_yaml())

    jobs = plan_jobs(cfg)
    done = set()
    if resume:
        done = {r.key for r in load_records(out) if not r.failed}
    else:
        for name in (RECORDS_FILE, TIMINGS_FILE):
            (out / name).unlink(missing_ok=True)
    pending = [j for j in jobs if j.key not in done]
    if done:
        log.info("resuming: %d of %d runs already complete", len(jobs) - len(pending), len(jobs))
    for job in {j.entry.topology.ref: j for j in pending}.values():
        job.entry.topology.save(out / "topologies" / f"{job.entry.topology.ref}.txt")

    factory = BackendFactory(cfg)
    try:
        with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool, \
                open(out / RECORDS_FILE, "a") as records, open(out / TIMINGS_FILE, "a") as timings:
            results = pool.map(lambda j: execute_job(j, cfg, factory), pending)
            # single writer: results arrive in job order
            for record, transcript in results:
                if transcript is not None:
                    path = out / "transcripts" / f"{record.run_id}.jsonl"
                    path.write_text(transcript.to_jsonl())
                records.write(record.to_json() + "\n")
                records.flush()
                timings.write(json.dumps({"run_id": record.run_id,
                                          "wall_time": record.wall_time}) + "\n")
                timings.flush()
                yield record
    finally:
        factory.close()


def run_experiment(cfg: ExperimentConfig, resume: bool = True) -> list[RunRecord]:
    """Execute every pending run and return all records of the experiment."""
    for _ in iter_experiment(cfg, resume):
        pass
    return load_records(cfg.out_dir)


def reevaluate(out_dir: str | Path) -> list[RunRecord]:
    """Recompute scores from persisted transcripts and topologies."""
    out = Path(out_dir)
    updated = []
    for rec in load_records(out):
        if rec.failed:
            updated.append(rec)
            continue
        t = labelled(Topology.load(out / "topologies" / f"{rec.topology_ref}.txt"))
        transcript = RunTranscript.from_jsonl(
            (out / "transcripts" / f"{rec.run_id}.jsonl").read_text())
        spec = TaskSpec.for_topology(TaskKind.parse(rec.task), t)
        ev = spec.evaluate(t, answers_from_transcript(transcript, spec, t.names()))
        new = RunRecord(**{**asdict(rec), "soft_score": float(ev.soft_score),
                           "solved": int(ev.solved)})
        updated.append(new)
    return updated
