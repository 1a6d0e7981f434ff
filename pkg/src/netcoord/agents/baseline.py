"""Uniform random answers over the valid options, with no communication."""

from __future__ import annotations

import random
from typing import Mapping, Sequence

from ..seeding import derive_seed
from ..tasks import FINAL_MARKER
from .history import read_history


class RandomBaselineAgent:
    kind = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def __repr__(self):
        return f"RandomBaselineAgent(seed={self.seed})"

    def generate(self, messages: Sequence[Mapping[str, str]]) -> str:
        view = read_history(messages)
        if not view.is_final:
            return "{}"
        options = view.options()
        rng = random.Random(derive_seed(self.seed, len(messages)))
        choice = rng.choice(options) if options else ""
        return f"{FINAL_MARKER} {choice}"


def random_baseline_agent(seed: int = 0) -> RandomBaselineAgent:
    return RandomBaselineAgent(seed)
