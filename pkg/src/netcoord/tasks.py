"""The five coordination tasks: prompt fragments, answer grammar and scoring.

Each evaluator returns an :class:`Evaluation` with a soft score in [0, 1], a
binary ``solved`` flag computed directly from the task predicate, and
human-readable diagnostics. ``oracle_check`` is a deliberately separate,
brute-force implementation of the solved predicates, used to cross-check the
evaluators in tests.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .errors import ParameterError
from .topology import Topology

FINAL_MARKER = "### Final Answer ###"
ORACLE_MAX_NODES = 12


class TaskKind(str, enum.Enum):
    COLORING = "Coloring"
    VERTEX_COVER = "VertexCover"
    MATCHING = "Matching"
    LEADER_ELECTION = "LeaderElection"
    CONSENSUS = "Consensus"

    @property
    def is_global(self) -> bool:
        return self in (TaskKind.LEADER_ELECTION, TaskKind.CONSENSUS)

    @classmethod
    def parse(cls, value: str | TaskKind) -> TaskKind:
        if isinstance(value, cls):
            return value
        key = str(value).replace("_", "").replace(" ", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        if key == "leader":
            return cls.LEADER_ELECTION
        raise ParameterError(f"unknown task {value!r}")


ALL_TASKS = tuple(TaskKind)


# -- final answers ----------------------------------------------------------

@dataclass(frozen=True)
class GroupChoice:
    group: int


@dataclass(frozen=True)
class YesNo:
    yes: bool


@dataclass(frozen=True)
class PartnerChoice:
    partner: str | None


@dataclass(frozen=True)
class Bit:
    bit: int


@dataclass(frozen=True)
class Invalid:
    raw: str = ""


FinalAnswer = Union[GroupChoice, YesNo, PartnerChoice, Bit, Invalid]


def answer_to_text(answer: FinalAnswer) -> str:
    """Canonical surface form, as an agent would write it after the marker."""
    if isinstance(answer, GroupChoice):
        return f"Group {answer.group}"
    if isinstance(answer, YesNo):
        return "Yes" if answer.yes else "No"
    if isinstance(answer, PartnerChoice):
        return answer.partner if answer.partner is not None else "None"
    if isinstance(answer, Bit):
        return str(answer.bit)
    return answer.raw


@dataclass
class Evaluation:
    soft_score: float
    solved: bool
    diagnostics: list[str] = field(default_factory=list)


# -- prompt fragments -------------------------------------------------------

_TASK1 = {
    TaskKind.COLORING: "Your task is to partition yourselves into groups such that agents "
                       "who are neighbors are never in the same group.",
    TaskKind.VERTEX_COVER: "Your task is to select, among all agents, a group of coordinators "
                           "such that whenever two agents communicate at least one of them is "
                           "a coordinator. The group of coordinators should be selected such "
                           "that every coordinator has at least one neighbor who is not a "
                           "coordinator.",
    TaskKind.MATCHING: "Your task is to find build groups of two agents each which can "
                       "communicate with each other.",
    TaskKind.LEADER_ELECTION: "Your task is to collaboratively solve the problem of electing "
                              "a single leader.",
    TaskKind.CONSENSUS: "Your goal is to agree on a single value with the other agents. The "
                        "possible values that you can decide on are either 0 or 1.",
}

_TASK2 = {
    TaskKind.COLORING: "You will be requested to state which group you assign yourself to. "
                       "There are exactly {k} groups available: Group 1,...,Group {k}. You "
                       "should assign yourself to exactly one of these groups. The final "
                       "result should be such that any two agents who are neighbors are in "
                       "different groups. In particular, you should assign yourself to a "
                       "group that is different from all of your neighbors' groups. ",
    TaskKind.VERTEX_COVER: "You will be requested to state whether you are a coordinator. The "
                           "response should either be 'Yes' or 'No'.",
    TaskKind.MATCHING: "You will be requested to name one of your neighbors that you build a "
                       "group with or 'None' if all your neighbors are already assigned to "
                       "other groups and cannot be in a group with you. In the end, every "
                       "agent should only be in at most one group and agents in the same group "
                       "have to name each other as the second group member consistently.",
    TaskKind.LEADER_ELECTION: "You will be requested to state whether or not you are the "
                              "leader. The response should either be 'Yes' or 'No'. The final "
                              "result should be such that exactly one agent responds with 'Yes' "
                              "and all others say 'No' as there should be exactly one leader.",
    TaskKind.CONSENSUS: "After the last round, each agent must decide on a single value.",
}

_QUESTION = {
    TaskKind.COLORING: "Which group do you assign yourself to?",
    TaskKind.VERTEX_COVER: "Are you a coordinator?",
    TaskKind.MATCHING: "Which of your neighbors do you build a group with?",
    TaskKind.LEADER_ELECTION: "Are you the leader?",
    TaskKind.CONSENSUS: "Which value do you decide on?",
}


def task_prompts(kind: TaskKind, delta_plus_one: int = 2) -> tuple[str, str]:
    kind = TaskKind.parse(kind)
    if kind is TaskKind.COLORING and delta_plus_one < 2:
        raise ParameterError("Coloring needs at least 2 groups")
    return _TASK1[kind], _TASK2[kind].format(k=delta_plus_one)


def answer_options(kind: TaskKind, delta_plus_one: int,
                   neighbor_names: Sequence[str]) -> list[str]:
    """The valid surface forms offered to an agent in its final request."""
    if kind is TaskKind.COLORING:
        return [f"Group {g}" for g in range(1, delta_plus_one + 1)]
    if kind in (TaskKind.VERTEX_COVER, TaskKind.LEADER_ELECTION):
        return ["Yes", "No"]
    if kind is TaskKind.MATCHING:
        return [*neighbor_names, "None"]
    return ["0", "1"]


def final_request(kind: TaskKind, delta_plus_one: int, neighbor_names: Sequence[str]) -> str:
    options = ", ".join(f"'{o}'" for o in answer_options(kind, delta_plus_one, neighbor_names))
    return (f"{_QUESTION[kind]} Format your answer as follows: '{FINAL_MARKER}', followed by "
            f"your final answer. Don't use any text for your final answer except one of these "
            f"valid options: {options}.")


_STRIP = " \t\r\n'\"`*.,:;!()[]{}"


def parse_final_answer(kind: TaskKind, raw: str, delta_plus_one: int,
                       agent_names: Sequence[str] = ()) -> FinalAnswer:
    """Read the answer after the last final-answer marker and check the grammar.

    Anything outside the grammar comes back as :class:`Invalid`.
    """
    pos = raw.rfind(FINAL_MARKER)
    if pos < 0:
        return Invalid(raw)
    body = raw[pos + len(FINAL_MARKER):].strip()
    first_line = body.splitlines()[0] if body else ""
    token = first_line.strip(_STRIP)
    folded = token.casefold()

    if kind is TaskKind.COLORING:
        m = re.fullmatch(r"(?:group\s*)?(\d+)", folded)
        if m and 1 <= int(m.group(1)) <= delta_plus_one:
            return GroupChoice(int(m.group(1)))
        return Invalid(raw)
    if kind in (TaskKind.VERTEX_COVER, TaskKind.LEADER_ELECTION):
        if folded in ("yes", "no"):
            return YesNo(folded == "yes")
        return Invalid(raw)
    if kind is TaskKind.CONSENSUS:
        if folded in ("0", "1"):
            return Bit(int(folded))
        return Invalid(raw)
    if folded == "none":
        return PartnerChoice(None)
    for name in agent_names:
        if name.casefold() == folded:
            return PartnerChoice(name)
    return Invalid(raw)


# -- evaluators -------------------------------------------------------------

def _answer(answers: Mapping[str, FinalAnswer], name: str) -> FinalAnswer:
    return answers.get(name, Invalid("<missing>"))


def _yes(a: FinalAnswer) -> bool:
    return isinstance(a, YesNo) and a.yes


def evaluate_coloring(t: Topology, answers: Mapping[str, FinalAnswer]) -> Evaluation:
    k = t.max_degree() + 1
    diags = []
    valid = True
    for name in t.names():
        a = _answer(answers, name)
        if not isinstance(a, GroupChoice):
            valid = False
            diags.append(f"{name}: invalid answer")
        elif not 1 <= a.group <= k:
            valid = False
            diags.append(f"{name}: group {a.group} outside 1..{k}")
    if not t.edges:
        return Evaluation(1.0, valid, diags)
    proper = 0
    for u, v in t.named_edges():
        a, b = _answer(answers, u), _answer(answers, v)
        if isinstance(a, GroupChoice) and isinstance(b, GroupChoice) and a.group != b.group:
            proper += 1
        else:
            diags.append(f"edge {u}-{v}: same group or invalid")
    soft = proper / len(t.edges)
    return Evaluation(soft, valid and proper == len(t.edges), diags)


def evaluate_vertex_cover(t: Topology, answers: Mapping[str, FinalAnswer]) -> Evaluation:
    coordinators = {name for name in t.names() if _yes(_answer(answers, name))}
    diags = []
    covered = 0
    for u, v in t.named_edges():
        if u in coordinators or v in coordinators:
            covered += 1
        else:
            diags.append(f"edge {u}-{v}: uncovered")
    non_essential = 0
    for i in range(t.n):
        name = t.name(i)
        if name in coordinators and all(t.name(w) in coordinators for w in t.neighbors(i)):
            non_essential += 1
            diags.append(f"{name}: non-essential coordinator")
    is_cover = covered == len(t.edges)
    solved = is_cover and non_essential == 0
    if not t.edges:
        coverage = 1.0
    else:
        coverage = covered / len(t.edges)
    if not coordinators:
        soft = 1.0 if not t.edges else 0.0
    else:
        soft = coverage * (1.0 - non_essential / len(coordinators))
    return Evaluation(soft, solved, diags)


def matching_inconsistencies(t: Topology, answers: Mapping[str, FinalAnswer]) -> dict[str, str]:
    """Per-agent inconsistency kind ('a', 'b', 'c' or 'invalid'); at most one per agent."""
    names = t.names()
    neighbor_sets = {t.name(i): {t.name(w) for w in t.neighbors(i)} for i in range(t.n)}
    found = {}
    for name in names:
        a = _answer(answers, name)
        if not isinstance(a, PartnerChoice):
            found[name] = "invalid"
        elif a.partner is not None:
            if a.partner not in neighbor_sets[name]:
                found[name] = "b"
            else:
                other = _answer(answers, a.partner)
                if not (isinstance(other, PartnerChoice) and other.partner == name):
                    found[name] = "a"
        else:
            for nb in neighbor_sets[name]:
                other = _answer(answers, nb)
                if isinstance(other, PartnerChoice) and other.partner is None:
                    found[name] = "c"
                    break
    return found


def evaluate_matching(t: Topology, answers: Mapping[str, FinalAnswer]) -> Evaluation:
    found = matching_inconsistencies(t, answers)
    diags = [f"{name}: inconsistency ({kind})" for name, kind in sorted(found.items())]
    soft = 1.0 - len(found) / t.n
    return Evaluation(soft, not found, diags)


def evaluate_leader_election(answers: Mapping[str, FinalAnswer]) -> Evaluation:
    leaders = sorted(name for name, a in answers.items() if _yes(a))
    ok = len(leaders) == 1
    diags = [] if ok else [f"{len(leaders)} agents answered Yes: {', '.join(leaders)}"]
    return Evaluation(1.0 if ok else 0.0, ok, diags)


def evaluate_consensus(answers: Mapping[str, FinalAnswer]) -> Evaluation:
    values = {a.bit if isinstance(a, Bit) else None for a in answers.values()}
    ok = len(values) == 1 and None not in values
    diags = [] if ok else [f"values announced: {sorted(map(str, values))}"]
    return Evaluation(1.0 if ok else 0.0, ok, diags)


def evaluate(kind: TaskKind, t: Topology, answers: Mapping[str, FinalAnswer]) -> Evaluation:
    kind = TaskKind.parse(kind)
    if kind is TaskKind.COLORING:
        return evaluate_coloring(t, answers)
    if kind is TaskKind.VERTEX_COVER:
        return evaluate_vertex_cover(t, answers)
    if kind is TaskKind.MATCHING:
        return evaluate_matching(t, answers)
    full = {name: _answer(answers, name) for name in t.names()}
    if kind is TaskKind.LEADER_ELECTION:
        return evaluate_leader_election(full)
    return evaluate_consensus(full)


# -- brute-force oracle -----------------------------------------------------

def _is_cover(edges, chosen: set) -> bool:
    return all(u in chosen or v in chosen for u, v in edges)


def oracle_check(kind: TaskKind, t: Topology, answers: Mapping[str, FinalAnswer]) -> bool:
    """Ground-truth solved flag by direct enumeration. Test fixture; n <= 12 only."""
    if t.n > ORACLE_MAX_NODES:
        raise ParameterError(f"oracle refuses n={t.n} > {ORACLE_MAX_NODES}")
    kind = TaskKind.parse(kind)
    names = t.names()
    edges = t.named_edges()
    got = [answers.get(name) for name in names]

    if kind is TaskKind.COLORING:
        k = t.max_degree() + 1
        if not all(isinstance(a, GroupChoice) and 1 <= a.group <= k for a in got):
            return False
        color = dict(zip(names, (a.group for a in got)))
        return all(color[u] != color[v] for u, v in edges)

    if kind is TaskKind.VERTEX_COVER:
        chosen = {n for n, a in zip(names, got) if isinstance(a, YesNo) and a.yes}
        if not _is_cover(edges, chosen):
            return False
        return all(not _is_cover(edges, chosen - {c}) for c in chosen)

    if kind is TaskKind.MATCHING:
        if not all(isinstance(a, PartnerChoice) for a in got):
            return False
        choice = {n: a.partner for n, a in zip(names, got)}
        edge_set = {frozenset(e) for e in edges}
        matched = set()
        for u, p in choice.items():
            if p is None:
                continue
            if frozenset((u, p)) not in edge_set or choice.get(p) != u:
                return False
            matched.add(u)
        return not any(u not in matched and v not in matched for u, v in edges)

    if kind is TaskKind.LEADER_ELECTION:
        return sum(1 for a in got if isinstance(a, YesNo) and a.yes) == 1

    if not all(isinstance(a, Bit) for a in got):
        return False
    count = sum(a.bit for a in got)
    return count == 0 or count == len(got)


@dataclass(frozen=True)
class TaskSpec:
    """A task bound to one topology (Coloring needs the topology's max degree)."""

    kind: TaskKind
    delta_plus_one: int

    @classmethod
    def for_topology(cls, kind: TaskKind | str, t: Topology) -> TaskSpec:
        return cls(TaskKind.parse(kind), t.max_degree() + 1)

    @property
    def prompts(self) -> tuple[str, str]:
        return task_prompts(self.kind, max(self.delta_plus_one, 2))

    def final_request(self, neighbor_names: Sequence[str]) -> str:
        return final_request(self.kind, self.delta_plus_one, neighbor_names)

    def options(self, neighbor_names: Sequence[str]) -> list[str]:
        return answer_options(self.kind, self.delta_plus_one, neighbor_names)

    def parse_answer(self, raw: str, agent_names: Sequence[str] = ()) -> FinalAnswer:
        return parse_final_answer(self.kind, raw, self.delta_plus_one, agent_names)

    def evaluate(self, t: Topology, answers: Mapping[str, FinalAnswer]) -> Evaluation:
        return evaluate(self.kind, t, answers)
