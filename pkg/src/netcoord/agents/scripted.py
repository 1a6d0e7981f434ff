"""Scripted distributed algorithms speaking the same JSON protocol as model agents.

Messages use a small key=value dialect inside ordinary message strings, e.g.
``prio=1234; rec=Ava:1234:Bo,Cy|Bo:77:Ava; ptr=Bo``. Every backend is a pure
function of (chat history, seed): on each call it re-reads its own history and
recomputes its state from scratch.

Coloring, vertex cover and matching agents flood knowledge records (name,
random priority, neighbour list). Each agent simulates the priority-greedy
algorithm on the part of the graph it has learned about; a node's decision is
fixed as soon as every higher-priority dependency is known. Once the learned
region covers the whole graph (after D deliveries) all agents agree exactly
with the centralized greedy outcome.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..seeding import derive_seed
from ..tasks import FINAL_MARKER
from .history import HistoryView, read_history

PRIORITY_BITS = 32


# -- message dialect --------------------------------------------------------

def encode(fields: Iterable[tuple[str, str]]) -> str:
    return "; ".join(f"{k}={v}" for k, v in fields)


def decode(text: str) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for part in text.split(";"):
        key, sep, value = part.strip().partition("=")
        if sep:
            out.setdefault(key, []).append(value)
    return out


@dataclass(frozen=True)
class Record:
    name: str
    priority: int
    neighbors: tuple[str, ...]

    @property
    def key(self) -> tuple[int, str]:
        # ties broken by name order
        return (self.priority, self.name)

    def encode(self) -> str:
        return f"{self.name}:{self.priority}:{','.join(self.neighbors)}"

    @classmethod
    def decode(cls, text: str) -> Record:
        name, prio, nbrs = text.split(":")
        return cls(name, int(prio), tuple(x for x in nbrs.split(",") if x))


def render(thoughts: Sequence[str], messages: Mapping[str, str]) -> str:
    body = json.dumps(dict(messages), sort_keys=True)
    return "\n".join(thoughts) + f"\n```json\n{body}\n```"


def render_final(thoughts: Sequence[str], answer: str) -> str:
    return "\n".join(thoughts) + f"\n{FINAL_MARKER} {answer}"


def draw_priority(seed: int) -> int:
    return random.Random(derive_seed(seed, "priority")).getrandbits(PRIORITY_BITS)


class ScriptedAgent:
    kind = "scripted"
    task = ""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def __repr__(self):
        return f"{type(self).__name__}(seed={self.seed})"

    def generate(self, messages: Sequence[Mapping[str, str]]) -> str:
        view = read_history(messages)
        if view.is_final:
            return self.final(view)
        return self.step(view)

    def step(self, view: HistoryView) -> str:
        raise NotImplementedError

    def final(self, view: HistoryView) -> str:
        raise NotImplementedError


# -- flooding of knowledge records ------------------------------------------

class RecordFloodingAgent(ScriptedAgent):
    """Learns (priority, neighbours) records hop by hop.

    In round r the agent forwards the records it learned from the round r-1
    deliveries, so after r deliveries it knows every node within distance r.
    """

    def own_record(self, view: HistoryView) -> Record:
        return Record(view.name, draw_priority(self.seed), tuple(sorted(view.neighbors)))

    def knowledge(self, view: HistoryView) -> tuple[dict[str, Record], list[Record]]:
        own = self.own_record(view)
        known = {own.name: own}
        fresh = [own]
        for inbox in view.inbox[1:]:
            fresh = []
            for sender in sorted(inbox):
                for chunk in decode(inbox[sender]).get("rec", []):
                    for item in chunk.split("|"):
                        if not item:
                            continue
                        rec = Record.decode(item)
                        if rec.name not in known:
                            known[rec.name] = rec
                            fresh.append(rec)
        return known, fresh

    def extra_fields(self, view: HistoryView, known: dict[str, Record]) -> list[tuple[str, str]]:
        return []

    def step(self, view: HistoryView) -> str:
        known, fresh = self.knowledge(view)
        fields = [("prio", str(known[view.name].priority))]
        if fresh:
            fields.append(("rec", "|".join(r.encode() for r in sorted(fresh, key=lambda r: r.name))))
        fields.extend(self.extra_fields(view, known))
        text = encode(fields)
        thoughts = [f"Round {view.round_index}: I know {len(known)} of {view.n} agents.",
                    "Forwarding newly learned records to all neighbors."]
        return render(thoughts, {nb: text for nb in view.neighbors})


def _complete(rec: Record, known: Mapping[str, Record]) -> bool:
    return all(nb in known for nb in rec.neighbors)


def greedy_coloring(known: Mapping[str, Record]) -> dict[str, int]:
    """Colors of every node whose higher-priority dependencies are all known."""
    color: dict[str, int] = {}
    blocked: set[str] = set()
    for rec in sorted(known.values(), key=lambda r: r.key, reverse=True):
        if not _complete(rec, known):
            blocked.add(rec.name)
            continue
        higher = [known[nb] for nb in rec.neighbors if known[nb].key > rec.key]
        if any(h.name in blocked or h.name not in color for h in higher):
            blocked.add(rec.name)
            continue
        used = {color[h.name] for h in higher}
        color[rec.name] = next(c for c in range(1, len(used) + 2) if c not in used)
    return color


def greedy_mis(known: Mapping[str, Record]) -> dict[str, bool]:
    """Membership in the random-priority greedy MIS, where determinable.

    Equivalent to Luby-style phases with fixed priorities: undecided local
    maxima join, their neighbours drop out, repeat.
    """
    status: dict[str, bool] = {}
    for rec in sorted(known.values(), key=lambda r: r.key, reverse=True):
        if not _complete(rec, known):
            continue
        higher = [known[nb] for nb in rec.neighbors if known[nb].key > rec.key]
        if any(h.name in status and status[h.name] for h in higher):
            status[rec.name] = False
        elif all(h.name in status for h in higher):
            status[rec.name] = True
    return status


class ColoringAgent(RecordFloodingAgent):
    task = "Coloring"

    def extra_fields(self, view, known):
        color = greedy_coloring(known).get(view.name)
        return [("color", str(color))] if color is not None else []

    def final(self, view):
        known, _ = self.knowledge(view)
        colors = greedy_coloring(known)
        mine = colors.get(view.name)
        thoughts = [f"I know {len(known)} of {view.n} agents."]
        if mine is None:
            # budget ran out: avoid every neighbour colour we can infer or were told
            announced = {}
            for inbox in view.inbox[1:]:
                for sender, text in inbox.items():
                    for c in decode(text).get("color", []):
                        announced[sender] = int(c)
            taken = {colors.get(nb, announced.get(nb)) for nb in view.neighbors}
            limit = view.groups or len(view.neighbors) + 1
            mine = next((c for c in range(1, limit + 1) if c not in taken), 1)
            thoughts.append("Not all higher-priority neighbors are known; choosing a free group.")
        else:
            thoughts.append("Greedy by priority fixes my group.")
        return render_final(thoughts, f"Group {mine}")


class VertexCoverAgent(RecordFloodingAgent):
    task = "VertexCover"

    def extra_fields(self, view, known):
        state = greedy_mis(known).get(view.name)
        return [("mis", "?" if state is None else str(int(state)))]

    def final(self, view):
        known, _ = self.knowledge(view)
        status = greedy_mis(known)
        in_mis = status.get(view.name)
        thoughts = [f"I know {len(known)} of {view.n} agents."]
        if in_mis is None:
            # deterministic fallback: join unless a neighbour is known to be in the
            # set or an undecided neighbour outranks us (priority, then name)
            me = known[view.name]
            undecided = [known[nb] for nb in view.neighbors
                         if nb in known and nb not in status]
            unknown = [nb for nb in view.neighbors if nb not in known]
            in_mis = (not any(status.get(nb) for nb in view.neighbors)
                      and all(r.key < me.key for r in undecided)
                      and all(nb > view.name for nb in unknown))
            thoughts.append("Undecided at budget end; using the deterministic fallback.")
        thoughts.append(f"state: {'in' if in_mis else 'out of'} independent set")
        return render_final(thoughts, "No" if in_mis else "Yes")


def edge_weight(a: Record, b: Record) -> int:
    lo, hi = sorted([a, b], key=lambda r: r.name)
    return derive_seed("edge", lo.name, lo.priority, hi.name, hi.priority)


def greedy_matching(known: Mapping[str, Record]) -> dict[frozenset, bool]:
    """Status of each known edge in the heaviest-edge-first greedy matching."""
    complete = {name for name, rec in known.items() if _complete(rec, known)}
    edges = {}
    for name in complete:
        for nb in known[name].neighbors:
            e = frozenset((name, nb))
            if e not in edges:
                edges[e] = edge_weight(known[name], known[nb])
    status: dict[frozenset, bool] = {}
    matched: set[str] = set()
    for e, w in sorted(edges.items(), key=lambda kv: kv[1], reverse=True):
        u, v = sorted(e)
        if u not in complete or v not in complete:
            continue
        adjacent = [frozenset((x, y)) for x in (u, v) for y in known[x].neighbors
                    if frozenset((x, y)) != e]
        heavier = [f for f in adjacent if edges.get(f, -1) > w or f not in edges]
        if any(status.get(f) for f in heavier):
            status[e] = False
        elif all(f in status for f in heavier):
            status[e] = True
            matched.update(e)
    return status


class MatchingAgent(RecordFloodingAgent):
    """Pointer-based matching that only commits on mutual pointers.

    Each round the agent points at its greedy partner if known, otherwise at
    the heaviest incident edge not yet ruled out. Two agents that pointed at
    each other in the same round are matched; both see that at the same time,
    so answers are always consistent, and unresolved agents answer None.
    """

    task = "Matching"

    def _pointers(self, view: HistoryView) -> list[str | None]:
        mine = []
        for out in view.outputs:
            ptr = None
            for text in _envelope_values(out):
                got = decode(text).get("ptr")
                if got:
                    ptr = got[0] or None
                break
            mine.append(ptr)
        return mine

    def partner(self, view: HistoryView) -> str | None:
        mine = self._pointers(view)
        for r, target in enumerate(mine):
            if target is None or r + 1 >= len(view.inbox):
                continue
            theirs = decode(view.inbox[r + 1].get(target, "")).get("ptr", [""])[0]
            if theirs == view.name:
                return target
        return None

    def extra_fields(self, view, known):
        partner = self.partner(view)
        if partner is not None:
            return [("ptr", partner), ("matched", "1")]
        me = known[view.name]
        status = greedy_matching(known)
        candidates = []
        for nb in view.neighbors:
            if nb not in known:
                continue
            e = frozenset((view.name, nb))
            if status.get(e) is False:
                continue
            if status.get(e):
                return [("ptr", nb)]
            candidates.append((edge_weight(me, known[nb]), nb))
        if not candidates:
            return [("ptr", "")]
        return [("ptr", max(candidates)[1])]

    def final(self, view):
        partner = self.partner(view)
        thoughts = ["Matched by mutual pointers." if partner else "No mutual partner found."]
        return render_final(thoughts, partner or "None")


def _envelope_values(raw: str) -> list[str]:
    start = raw.rfind("{")
    try:
        obj = json.loads(raw[start:raw.rfind("}") + 1])
    except (ValueError, json.JSONDecodeError):
        return []
    return [obj[k] for k in sorted(obj)]


# -- flooding of maxima -----------------------------------------------------

class LeaderElectionAgent(ScriptedAgent):
    """Max-identifier flooding on (priority, name) pairs."""

    task = "LeaderElection"

    def best(self, view: HistoryView) -> tuple[int, str]:
        best = (draw_priority(self.seed), view.name)
        for inbox in view.inbox[1:]:
            for text in inbox.values():
                for item in decode(text).get("max", []):
                    prio, name = item.split(":", 1)
                    best = max(best, (int(prio), name))
        return best

    def step(self, view):
        prio, name = self.best(view)
        text = encode([("max", f"{prio}:{name}")])
        return render([f"Largest identifier seen so far: {name}."],
                      {nb: text for nb in view.neighbors})

    def final(self, view):
        _, name = self.best(view)
        return render_final([f"Leader by maximum identifier: {name}."],
                            "Yes" if name == view.name else "No")


class ConsensusAgent(ScriptedAgent):
    """OR-flooding of seeded initial bits: everyone ends on the maximum bit."""

    task = "Consensus"

    def __init__(self, seed: int = 0, initial: int | None = None):
        super().__init__(seed)
        self.initial = initial

    def initial_bit(self) -> int:
        if self.initial is not None:
            return int(self.initial)
        return random.Random(derive_seed(self.seed, "bit")).getrandbits(1)

    def value(self, view: HistoryView) -> int:
        bit = self.initial_bit()
        for inbox in view.inbox[1:]:
            for text in inbox.values():
                bit = max([bit, *(int(b) for b in decode(text).get("bit", []))])
        return bit

    def step(self, view):
        text = encode([("bit", str(self.value(view)))])
        return render([f"Current value {self.value(view)}."], {nb: text for nb in view.neighbors})

    def final(self, view):
        bit = self.value(view)
        return render_final([f"Deciding on the largest value seen: {bit}."], str(bit))


def scripted_coloring_agent(seed: int = 0) -> ColoringAgent:
    return ColoringAgent(seed)


def scripted_vertex_cover_agent(seed: int = 0) -> VertexCoverAgent:
    return VertexCoverAgent(seed)


def scripted_matching_agent(seed: int = 0) -> MatchingAgent:
    return MatchingAgent(seed)


def scripted_leader_agent(seed: int = 0) -> LeaderElectionAgent:
    return LeaderElectionAgent(seed)


def scripted_consensus_agent(seed: int = 0, initial: int | None = None) -> ConsensusAgent:
    return ConsensusAgent(seed, initial)


SCRIPTED = {
    "Coloring": scripted_coloring_agent,
    "VertexCover": scripted_vertex_cover_agent,
    "Matching": scripted_matching_agent,
    "LeaderElection": scripted_leader_agent,
    "Consensus": scripted_consensus_agent,
}


def scripted_agent(task: str, seed: int = 0) -> ScriptedAgent:
    return SCRIPTED[str(getattr(task, "value", task))](seed)
