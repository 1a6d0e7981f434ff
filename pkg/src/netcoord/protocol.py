"""Synchronous round-based message passing between agent backends.

A run has T rounds. In round 0 every agent answers its system prompt; in each
round 1..T-1 it first sees the messages its neighbours addressed to it in the
previous round and then emits a new envelope (a flat JSON object mapping
neighbour names to message strings). Messages emitted in the last round are
never delivered. After the last round every agent is asked for its final,
task-specific answer.

Within a round, generations only depend on state up to the previous round, so
they may run concurrently; a barrier separates rounds.
"""

from __future__ import annotations

import enum
import itertools
import json
import logging
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Mapping, Protocol, Sequence

from .errors import BackendError, EnvelopeParseError, ParameterError, RunFailedError
from .names import NAME_POOL
from .tasks import FinalAnswer, Invalid, TaskKind, TaskSpec
from .topology import Topology, metrics

log = logging.getLogger(__name__)

LOCAL_TASK_ROUNDS = {4: 4, 8: 5, 16: 6}

SYSTEM_TEMPLATE = (
    "You are an agent that is connected with other agents (your neighbors), who you "
    "communicate with. Your neighbors can in turn communicate with their neighbors and so "
    "forth. {task1}.\n"
    "The rules are as follows:\n"
    "1. There are {n} agents in total. Everybody has a unique name. Your name is {name}.\n"
    "2. You can only communicate with your immediate neighbors ({neighbors}). You cannot see "
    "or directly communicate with anyone else, unless information is relayed by intermediate "
    "agents.\n"
    "3. You can exchange text-based messages with your neighbors in rounds. In each round, "
    "you will first receive the last messages sent by your neighbors and then be asked to "
    "generate your response messages which your neighbors receive in the next round. This "
    "process repeats for {rounds} rounds of message passing. Importantly, the process is "
    "synchronous: Every agent decides on which messages to send at the same time and sees the "
    "messages from other agents only in the next round.\n"
    "4. Everybody (including you) decides what to share or request from neighbors. In every "
    "round, think step-by-step about the next set of messages you want to send. Output a JSON "
    "string that contains your response messages.\n"
    "5. The messages you send to your neighbors are formatted as JSON. For example, if your "
    "neighbors are Alan and Bob, your output should look as follows: ``` {{\"Alan\": \"Message "
    "that will be sent to Alan.\", \"Bob\": \"Message that will be sent to Bob.\"}} ``` It is "
    "not mandatory to send a message to every neighbor in every round. If you do not want to "
    "send a message to a particular neighbor, you may omit their name from the JSON.\n"
    "6. After {rounds} message passes, you have to solve the following task: {task2}."
)

COT_INSTRUCTION = ("Elaborate your chain of thought step-by-step first, then output the "
                   "messages for your neighbors. Output your messages in JSON format as "
                   "specified earlier.")
FIRST_ROUND_PREFIX = "This is the first round of message passing. "
INCOMING_PREFIX = "These are the messages from your neighbors:"
NO_MESSAGES = "You did not receive any messages from your neighbors in the last round."
ENVELOPE_RETRY = ("Your previous response did not contain a valid flat JSON object with your "
                  "messages. Please try again. Output your messages as a JSON object whose keys "
                  "are the names of your neighbors and whose values are the message texts.")
FINAL_RETRY = "Your previous answer did not follow the required format. Please try again. "


class BudgetMode(str, enum.Enum):
    BENCHMARK = "benchmark"
    SCALING = "scaling"


class EventKind(str, enum.Enum):
    SYSTEM = "system"
    OUTGOING = "outgoing"
    INCOMING = "incoming"
    RETRY = "retry"
    FINAL = "final"


class AgentBackend(Protocol):
    def generate(self, messages: Sequence[Mapping[str, str]]) -> str:
        """Return the next assistant output given a role-tagged chat history."""


# -- identities and budgets -------------------------------------------------

@dataclass(frozen=True)
class AgentIdentity:
    node_index: int
    name: str
    neighbor_names: tuple[str, ...]


def assign_names(t: Topology, pool: Sequence[str] = NAME_POOL,
                 seed: int = 0) -> list[AgentIdentity]:
    """Seeded sampling of unique names; returns identities in node order."""
    if len(set(pool)) != len(pool):
        raise ParameterError("name pool entries must be unique")
    if len(pool) < t.n:
        raise ParameterError(f"name pool has {len(pool)} entries, need {t.n}")
    names = random.Random(seed).sample(list(pool), t.n)
    return [AgentIdentity(i, names[i], tuple(sorted(names[w] for w in t.neighbors(i))))
            for i in range(t.n)]


def name_topology(t: Topology, pool: Sequence[str] = NAME_POOL, seed: int = 0) -> Topology:
    return t.with_labels([a.name for a in assign_names(t, pool, seed)])


def identities(t: Topology) -> list[AgentIdentity]:
    return [AgentIdentity(i, t.name(i), tuple(t.neighbor_names(i))) for i in range(t.n)]


def compute_round_budget(task: TaskKind | TaskSpec, t: Topology,
                         mode: BudgetMode | str = BudgetMode.BENCHMARK) -> int:
    kind = task.kind if isinstance(task, TaskSpec) else TaskKind.parse(task)
    mode = BudgetMode(mode)
    diameter_rule = 2 * metrics(t).diameter + 1
    if mode is BudgetMode.SCALING or kind.is_global:
        return diameter_rule
    if t.n in LOCAL_TASK_ROUNDS:
        return LOCAL_TASK_ROUNDS[t.n]
    log.info("no size-based budget for n=%d; using 2D+1 = %d", t.n, diameter_rule)
    return diameter_rule


def build_system_prompt(task: TaskSpec, agent: AgentIdentity, n: int, rounds: int) -> str:
    task1, task2 = task.prompts
    return SYSTEM_TEMPLATE.format(task1=task1.rstrip(". "), task2=task2.rstrip(". "), n=n,
                                  name=agent.name, neighbors=", ".join(agent.neighbor_names),
                                  rounds=rounds)


# -- envelopes --------------------------------------------------------------

@dataclass
class RoundEnvelope:
    round_index: int
    sender: str
    messages: dict[str, str] = field(default_factory=dict)


_decoder = json.JSONDecoder()


def _json_objects(raw: str) -> list[object]:
    found = []
    i = raw.find("{")
    while i >= 0:
        try:
            obj, end = _decoder.raw_decode(raw, i)
        except json.JSONDecodeError:
            i = raw.find("{", i + 1)
            continue
        found.append(obj)
        i = raw.find("{", end)
    return found


def parse_message_envelope(raw: str, allowed_recipients: Iterable[str], round_index: int = 0,
                           sender: str = "") -> RoundEnvelope:
    """Extract the last JSON object in ``raw`` as a message envelope.

    Code fences and prose around the object are ignored. Recipients outside
    ``allowed_recipients`` are dropped with a warning.
    """
    objects = _json_objects(raw)
    if not objects:
        raise EnvelopeParseError("no JSON object found")
    obj = objects[-1]
    if not isinstance(obj, dict):
        raise EnvelopeParseError("last JSON value is not an object")
    allowed = set(allowed_recipients)
    messages = {}
    for key, value in obj.items():
        if not isinstance(value, str):
            raise EnvelopeParseError(f"value for {key!r} is not a string (non-flat JSON)")
        if key not in allowed:
            log.warning("%s addressed unknown recipient %r; dropped", sender or "agent", key)
            continue
        messages[key] = value
    return RoundEnvelope(round_index, sender, messages)


def format_incoming(messages: Mapping[str, str]) -> str:
    if not messages:
        return f"{NO_MESSAGES}\n{COT_INSTRUCTION}"
    parts = [INCOMING_PREFIX]
    parts.extend(f"Message from {sender}: {messages[sender]}" for sender in sorted(messages))
    parts.append(COT_INSTRUCTION)
    return "\n".join(parts)


# -- transcripts ------------------------------------------------------------

@dataclass
class TranscriptEvent:
    run_id: str
    task: str
    topology_ref: str
    round: int
    event_kind: str
    agent: str
    counterpart: str | None
    content: str
    timestamp: float


@dataclass
class RunTranscript:
    run_id: str
    task: TaskKind
    topology_ref: str
    round_count: int
    events: list[TranscriptEvent] = field(default_factory=list)
    # live state, not serialized
    histories: dict[str, list[dict]] = field(default_factory=dict, repr=False)
    neighbors: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False)
    degraded: list[tuple[str, int]] = field(default_factory=list, repr=False)
    recorder: object = field(default=None, repr=False, compare=False)

    def agents(self) -> list[str]:
        return sorted({e.agent for e in self.events if e.event_kind == EventKind.SYSTEM})

    def select(self, agent: str | None = None, kind: str | None = None,
               round_index: int | None = None) -> list[TranscriptEvent]:
        return [e for e in self.events
                if (agent is None or e.agent == agent)
                and (kind is None or e.event_kind == kind)
                and (round_index is None or e.round == round_index)]

    def incoming(self, agent: str, round_index: int) -> dict[str, str]:
        return {e.counterpart: e.content
                for e in self.select(agent, EventKind.INCOMING, round_index)}

    def sent(self, agent: str, round_index: int) -> dict[str, str]:
        """Messages ``agent`` addressed to its neighbours in ``round_index``."""
        out = self.select(agent, EventKind.OUTGOING, round_index)
        if not out:
            return {}
        env = parse_message_envelope(out[-1].content, self.neighbors.get(agent, ()),
                                     round_index, agent)
        return env.messages

    def final_texts(self) -> dict[str, str]:
        return {e.agent: e.content for e in self.select(kind=EventKind.FINAL)}

    def retry_count(self, agent: str, round_index: int) -> int:
        return len(self.select(agent, EventKind.RETRY, round_index))

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(e), ensure_ascii=False, sort_keys=True) + "\n"
                       for e in self.events)

    @classmethod
    def from_jsonl(cls, text: str) -> RunTranscript:
        events = [TranscriptEvent(**json.loads(line)) for line in text.splitlines() if line.strip()]
        if not events:
            raise ParameterError("empty transcript")
        first = events[0]
        rounds = max((e.round for e in events if e.event_kind == EventKind.OUTGOING),
                      default=-1) + 1
        tr = cls(first.run_id, TaskKind.parse(first.task), first.topology_ref, rounds, events)
        for e in events:
            if e.event_kind == EventKind.SYSTEM:
                tr.neighbors[e.agent] = neighbors_from_prompt(e.content)
        return tr


def neighbors_from_prompt(system_prompt: str) -> tuple[str, ...]:
    m = re.search(r"immediate neighbors \(([^)]*)\)", system_prompt)
    if not m or not m.group(1).strip():
        return ()
    return tuple(x.strip() for x in m.group(1).split(","))


# -- the engine -------------------------------------------------------------

@dataclass
class ProtocolConfig:
    retry_limit: int = 2
    transport_retries: int = 2
    backoff_base: float = 0.5
    max_workers: int = 1
    clock: Callable[[], float] | None = None
    sleep: Callable[[float], None] = time.sleep


class _Recorder:
    """Appends events with either wall-clock or logical (sequence) timestamps."""

    def __init__(self, transcript: RunTranscript, clock):
        self.tr = transcript
        self.clock = clock
        self._seq = itertools.count()

    def add(self, round_index, kind, agent, content, counterpart=None):
        ts = self.clock() if self.clock is not None else float(next(self._seq))
        self.tr.events.append(TranscriptEvent(
            self.tr.run_id, self.tr.task.value, self.tr.topology_ref, round_index,
            EventKind(kind).value, agent, counterpart, content, ts))


def _invoke(backend: AgentBackend, history: list[dict], cfg: ProtocolConfig, agent: str) -> str:
    for attempt in range(cfg.transport_retries + 1):
        try:
            return backend.generate([dict(m) for m in history])
        except BackendError as exc:
            if attempt == cfg.transport_retries:
                raise RunFailedError(f"backend for {agent} failed: {exc}") from exc
            delay = cfg.backoff_base * 2 ** attempt
            log.warning("backend for %s failed (%s); retrying in %.2fs", agent, exc, delay)
            cfg.sleep(delay)
    raise AssertionError("unreachable")


def _map(cfg: ProtocolConfig, fn, items):
    if cfg.max_workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
        return list(pool.map(fn, items))


def _generate_envelope(backend, history, allowed, cfg, agent, round_index):
    """One round's generation with parse retries. Returns (raw or None, invalid outputs)."""
    invalid = []
    for attempt in range(cfg.retry_limit + 1):
        raw = _invoke(backend, history, cfg, agent)
        history.append({"role": "assistant", "content": raw})
        try:
            env = parse_message_envelope(raw, allowed, round_index, agent)
        except EnvelopeParseError as exc:
            log.info("round %d: %s produced unparseable output (%s)", round_index, agent, exc)
            invalid.append(raw)
            if attempt < cfg.retry_limit:
                history.append({"role": "user", "content": ENVELOPE_RETRY})
            continue
        return raw, env, invalid
    return None, RoundEnvelope(round_index, agent, {}), invalid


def run_rounds(t: Topology, agents: Mapping[str, AgentBackend], task: TaskSpec, rounds: int,
               run_id: str = "run", config: ProtocolConfig | None = None) -> RunTranscript:
    """Execute ``rounds`` synchronous message-passing rounds on a labelled topology."""
    cfg = config or ProtocolConfig()
    if rounds < 1:
        raise ParameterError("need at least one round")
    ids = identities(t)
    names = [a.name for a in ids]
    if set(agents) != set(names):
        raise ParameterError("exactly one backend per agent name is required")
    tr = RunTranscript(run_id, task.kind, t.ref, rounds)
    rec = _Recorder(tr, cfg.clock)
    order = sorted(ids, key=lambda a: a.name)
    for a in order:
        prompt = build_system_prompt(task, a, t.n, rounds)
        tr.histories[a.name] = [{"role": "system", "content": prompt}]
        tr.neighbors[a.name] = a.neighbor_names
        rec.add(0, EventKind.SYSTEM, a.name, prompt)

    inbox: dict[str, dict[str, str]] = {a.name: {} for a in order}
    for r in range(rounds):
        for a in order:
            if r > 0:
                for sender in sorted(inbox[a.name]):
                    rec.add(r, EventKind.INCOMING, a.name, inbox[a.name][sender], sender)
                request = format_incoming(inbox[a.name])
            else:
                request = FIRST_ROUND_PREFIX + COT_INSTRUCTION
            tr.histories[a.name].append({"role": "user", "content": request})

        def step(a: AgentIdentity, r=r):
            return _generate_envelope(agents[a.name], tr.histories[a.name],
                                      a.neighbor_names, cfg, a.name, r)

        results = _map(cfg, step, order)
        # barrier: deliveries for round r+1 are built only after every agent generated
        inbox = {a.name: {} for a in order}
        for a, (raw, env, invalid) in zip(order, results):
            for bad in invalid:
                rec.add(r, EventKind.RETRY, a.name, bad)
            if raw is None:
                log.warning("round %d: %s exhausted retries; sending nothing", r, a.name)
                tr.degraded.append((a.name, r))
                rec.add(r, EventKind.OUTGOING, a.name, "{}")
            else:
                rec.add(r, EventKind.OUTGOING, a.name, raw)
            for recipient, text in env.messages.items():
                inbox[recipient][a.name] = text
    tr.recorder = rec
    return tr


def collect_final_answers(transcript: RunTranscript, task: TaskSpec,
                          agents: Mapping[str, AgentBackend],
                          config: ProtocolConfig | None = None) -> dict[str, FinalAnswer]:
    """Ask every agent for its final answer; one retry on an answer outside the grammar."""
    cfg = config or ProtocolConfig()
    rec = transcript.recorder or _Recorder(transcript, cfg.clock)
    final_round = transcript.round_count
    all_names = sorted(transcript.histories)

    def ask(name: str):
        history = transcript.histories[name]
        request = task.final_request(transcript.neighbors[name])
        history.append({"role": "user", "content": request})
        raw = _invoke(agents[name], history, cfg, name)
        history.append({"role": "assistant", "content": raw})
        answer = task.parse_answer(raw, all_names)
        if not isinstance(answer, Invalid):
            return raw, answer, None
        history.append({"role": "user", "content": FINAL_RETRY + request})
        raw2 = _invoke(agents[name], history, cfg, name)
        history.append({"role": "assistant", "content": raw2})
        return raw2, task.parse_answer(raw2, all_names), raw

    results = _map(cfg, ask, all_names)
    answers = {}
    for name, (raw, answer, invalid) in zip(all_names, results):
        if invalid is not None:
            rec.add(final_round, EventKind.RETRY, name, invalid)
        rec.add(final_round, EventKind.FINAL, name, raw)
        answers[name] = answer
    return answers


def answers_from_transcript(transcript: RunTranscript, task: TaskSpec,
                            agent_names: Sequence[str]) -> dict[str, FinalAnswer]:
    finals = transcript.final_texts()
    return {name: task.parse_answer(finals[name], agent_names) if name in finals
            else Invalid("<missing>") for name in agent_names}
