"""Reading an agent's own chat history back into structured state.

Scripted and baseline backends are given nothing but the role-tagged history
the protocol built for them, so everything they know (own name, neighbours,
round index, received messages) is recovered here from the prompt texts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..protocol import ENVELOPE_RETRY, FINAL_RETRY, INCOMING_PREFIX, NO_MESSAGES, \
    neighbors_from_prompt
from ..tasks import FINAL_MARKER

_NAME = re.compile(r"Your name is (.+?)\.\n")
_AGENTS = re.compile(r"There are (\d+) agents in total")
_ROUNDS = re.compile(r"process repeats for (\d+) rounds")
_GROUPS = re.compile(r"There are exactly (\d+) groups available")
_OPTIONS = re.compile(r"valid options: (.*)\.\s*$", re.S)


@dataclass
class HistoryView:
    name: str
    neighbors: tuple[str, ...]
    n: int
    rounds: int
    groups: int | None
    # inbox[r] = messages received at the start of round r; inbox[0] is empty
    inbox: list[dict[str, str]] = field(default_factory=list)
    # own accepted outputs, one per completed round
    outputs: list[str] = field(default_factory=list)
    final_request: str | None = None

    @property
    def round_index(self) -> int:
        """Index of the round being generated (rounds completed, once final)."""
        return len(self.inbox) - 1 if not self.is_final else len(self.inbox)

    @property
    def is_final(self) -> bool:
        return self.final_request is not None

    def options(self) -> list[str]:
        if not self.final_request:
            return []
        m = _OPTIONS.search(self.final_request)
        return re.findall(r"'([^']*)'", m.group(1)) if m else []


def _parse_incoming(text: str, neighbors: Sequence[str]) -> dict[str, str]:
    if text.startswith(NO_MESSAGES):
        return {}
    body = text[len(INCOMING_PREFIX):]
    alternatives = "|".join(re.escape(n) for n in sorted(neighbors, key=len, reverse=True))
    if not alternatives:
        return {}
    pattern = re.compile(rf"\nMessage from ({alternatives}): ")
    parts = pattern.split(body)
    messages = {}
    # parts = [prefix, name1, text1, name2, text2, ...]; last text carries the instruction
    for i in range(1, len(parts) - 1, 2):
        chunk = parts[i + 1]
        if i + 2 >= len(parts):
            chunk = chunk.rsplit("\n", 1)[0]
        messages[parts[i]] = chunk
    return messages


def read_history(messages: Sequence[Mapping[str, str]]) -> HistoryView:
    system = messages[0]["content"]
    name = _NAME.search(system).group(1)
    groups = _GROUPS.search(system)
    view = HistoryView(
        name=name,
        neighbors=neighbors_from_prompt(system),
        n=int(_AGENTS.search(system).group(1)),
        rounds=int(_ROUNDS.search(system).group(1)),
        groups=int(groups.group(1)) if groups else None,
    )
    last_assistant = None
    for msg in messages[1:]:
        role, content = msg["role"], msg["content"]
        if role == "assistant":
            last_assistant = content
            continue
        if content.startswith(ENVELOPE_RETRY) or content.startswith(FINAL_RETRY):
            continue
        # any other user turn closes the previous round
        if view.inbox and last_assistant is not None:
            view.outputs.append(last_assistant)
        last_assistant = None
        if FINAL_MARKER in content:
            view.final_request = content
        elif content.startswith(INCOMING_PREFIX) or content.startswith(NO_MESSAGES):
            view.inbox.append(_parse_incoming(content, view.neighbors))
        else:
            view.inbox.append({})
    return view
