import itertools
from contextlib import contextmanager

import pytest

from netcoord.topology import GraphFamily, Topology, iter_suite


def make_topology(n, edges, names=None, family=GraphFamily.DELAUNAY):
    t = Topology(n, tuple(edges), family, 0)
    if names is None:
        names = [chr(ord("a") + i) for i in range(n)]
    return t.with_labels(names)


def path(n):
    return make_topology(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return make_topology(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return make_topology(n, list(itertools.combinations(range(n), 2)))


def star(leaves):
    return make_topology(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


@pytest.fixture(scope="session")
def default_suite():
    return list(iter_suite(seed=0))


@pytest.fixture(scope="session")
def small_suite_graphs(default_suite):
    """Suite graphs with n <= 8, labelled a, b, c, ..."""
    out = []
    for e in default_suite:
        if e.size <= 8:
            t = e.topology
            out.append(t.with_labels([f"v{i}" for i in range(t.n)]))
    return out


def check_synchrony(tr):
    """Incoming at round r equals what neighbours addressed to the agent at r-1."""
    for v in tr.agents():
        for r in range(1, tr.round_count):
            expected = {}
            for u in tr.neighbors[v]:
                sent = tr.sent(u, r - 1)
                if v in sent:
                    expected[u] = sent[v]
            assert tr.incoming(v, r) == expected, (v, r)


def check_locality(tr):
    for e in tr.events:
        if e.event_kind == "incoming":
            assert e.counterpart in tr.neighbors[e.agent]


def run_scripted(t, kind, rounds=None, seed=0, factory=None, mode="benchmark"):
    """Run one task on a labelled topology with scripted agents; returns (evaluation, transcript, answers)."""
    from netcoord.agents import scripted_agent
    from netcoord.protocol import collect_final_answers, compute_round_budget, run_rounds
    from netcoord.seeding import derive_seed
    from netcoord.tasks import TaskSpec

    spec = TaskSpec.for_topology(kind, t)
    rounds = rounds or compute_round_budget(kind, t, mode)
    make = factory or (lambda name: scripted_agent(kind, derive_seed(seed, name)))
    agents = {name: make(name) for name in t.names()}
    tr = run_rounds(t, agents, spec, rounds)
    answers = collect_final_answers(tr, spec, agents)
    return spec.evaluate(t, answers), tr, answers


ACCEPTANCE_RESULTS = {}


@contextmanager
def criterion(number, title):
    """Record and print one pass/fail line for an acceptance criterion."""
    try:
        yield
    except BaseException:
        ACCEPTANCE_RESULTS[number] = f"criterion {number}: FAIL  {title}"
        print(ACCEPTANCE_RESULTS[number])
        raise
    ACCEPTANCE_RESULTS[number] = f"criterion {number}: PASS  {title}"
    print(ACCEPTANCE_RESULTS[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
