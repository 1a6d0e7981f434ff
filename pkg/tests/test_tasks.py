import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from netcoord.errors import ParameterError
from netcoord.tasks import (
    ALL_TASKS,
    Bit,
    GroupChoice,
    Invalid,
    PartnerChoice,
    TaskKind,
    TaskSpec,
    YesNo,
    evaluate,
    evaluate_coloring,
    evaluate_consensus,
    evaluate_leader_election,
    evaluate_matching,
    evaluate_vertex_cover,
    final_request,
    oracle_check,
    parse_final_answer,
    task_prompts,
)
from netcoord.topology import gen_small_world

from conftest import complete, cycle, make_topology, path, star


def groups(t, values):
    return {name: GroupChoice(g) for name, g in zip(t.names(), values)}


def yesno(t, values):
    return {name: YesNo(bool(v)) for name, v in zip(t.names(), values)}


# -- prompts ----------------------------------------------------------------

def test_prompt_fragments():
    assert "a group of coordinators" in task_prompts(TaskKind.VERTEX_COVER)[0]
    assert "name one of your neighbors" in task_prompts(TaskKind.MATCHING)[1]
    assert "either 0 or 1" in task_prompts(TaskKind.CONSENSUS)[0]
    assert "exactly 4 groups available: Group 1,...,Group 4" in task_prompts(TaskKind.COLORING, 4)[1]
    with pytest.raises(ParameterError):
        task_prompts(TaskKind.COLORING, 1)


def test_final_request_leader_matches_protocol_text():
    text = final_request(TaskKind.LEADER_ELECTION, 2, [])
    assert text == ("Are you the leader? Format your answer as follows: '### Final Answer ###', "
                    "followed by your final answer. Don't use any text for your final answer "
                    "except one of these valid options: 'Yes', 'No'.")


# -- answer grammar ---------------------------------------------------------

@pytest.mark.parametrize("raw,expected", [
    ("### Final Answer ### Yes", YesNo(True)),
    ("thinking...\n### Final Answer ###\n  no.", YesNo(False)),
    ("### Final Answer ### Yes\n### Final Answer ### **No**", YesNo(False)),
])
def test_parse_yes_no(raw, expected):
    assert parse_final_answer(TaskKind.LEADER_ELECTION, raw, 2) == expected


@pytest.mark.parametrize("raw", ["### Final Answer ### group 2", "### Final Answer ### Group 2",
                                 "### Final Answer ### 2", "### Final Answer ### 'Group 2'"])
def test_parse_group(raw):
    assert parse_final_answer(TaskKind.COLORING, raw, 4) == GroupChoice(2)


@pytest.mark.parametrize("kind,raw", [
    (TaskKind.LEADER_ELECTION, "maybe"),
    (TaskKind.LEADER_ELECTION, "### Final Answer ### maybe"),
    (TaskKind.COLORING, "### Final Answer ### Group 5"),
    (TaskKind.COLORING, "### Final Answer ### Group 0"),
    (TaskKind.CONSENSUS, "### Final Answer ### 2"),
    (TaskKind.MATCHING, "### Final Answer ### Zed"),
])
def test_parse_invalid(kind, raw):
    assert isinstance(parse_final_answer(kind, raw, 4, ["Ava", "Bo"]), Invalid)


def test_parse_partner_and_bit():
    assert parse_final_answer(TaskKind.MATCHING, "### Final Answer ### bo", 2, ["Ava", "Bo"]) \
        == PartnerChoice("Bo")
    assert parse_final_answer(TaskKind.MATCHING, "### Final Answer ### None", 2, ["Ava"]) \
        == PartnerChoice(None)
    assert parse_final_answer(TaskKind.CONSENSUS, "### Final Answer ### 1", 2) == Bit(1)


# -- evaluator examples -----------------------------------------------------

def test_coloring_examples():
    k3 = complete(3)
    ev = evaluate_coloring(k3, groups(k3, [1, 1, 1]))
    assert ev.soft_score == 0.0 and not ev.solved
    c4 = cycle(4)
    ev = evaluate_coloring(c4, groups(c4, [1, 2, 1, 2]))
    assert ev.soft_score == 1.0 and ev.solved
    # edges a-b, b-c, c-d, d-a with groups 1,1,2,2: only b-c and d-a differ
    ev = evaluate_coloring(c4, groups(c4, [1, 1, 2, 2]))
    assert ev.soft_score == 0.5 and not ev.solved


def test_coloring_invalid_and_edgeless():
    c4 = cycle(4)
    answers = groups(c4, [1, 2, 1, 2])
    answers["a"] = Invalid("?")
    ev = evaluate_coloring(c4, answers)
    assert ev.soft_score == 0.5 and not ev.solved
    single = make_topology(1, [])
    assert evaluate_coloring(single, {"a": GroupChoice(1)}).solved


def test_vertex_cover_examples():
    s = star(3)
    ev = evaluate_vertex_cover(s, yesno(s, [1, 0, 0, 0]))
    assert ev.soft_score == 1.0 and ev.solved
    ev = evaluate_vertex_cover(s, yesno(s, [1, 1, 1, 1]))
    assert ev.soft_score == 0.0 and not ev.solved
    ev = evaluate_vertex_cover(s, yesno(s, [0, 0, 0, 0]))
    assert ev.soft_score == 0.0 and not ev.solved


def test_vertex_cover_partial_formula():
    p = path(4)  # a-b-c-d
    # coordinators a, b: covers a-b, b-c, not c-d; a non-essential (only neighbor b is one)
    ev = evaluate_vertex_cover(p, yesno(p, [1, 1, 0, 0]))
    assert ev.soft_score == pytest.approx((2 / 3) * (1 - 1 / 2))


def test_vertex_cover_edgeless():
    single = make_topology(1, [])
    assert evaluate_vertex_cover(single, {"a": YesNo(False)}).solved
    assert evaluate_vertex_cover(single, {"a": YesNo(False)}).soft_score == 1.0
    assert not evaluate_vertex_cover(single, {"a": YesNo(True)}).solved


def test_matching_examples():
    k2 = complete(2)
    ev = evaluate_matching(k2, {"a": PartnerChoice("b"), "b": PartnerChoice("a")})
    assert ev.soft_score == 1.0 and ev.solved
    p3 = path(3)
    ev = evaluate_matching(p3, {"a": PartnerChoice("b"), "b": PartnerChoice("a"),
                                "c": PartnerChoice(None)})
    assert ev.solved
    ev = evaluate_matching(p3, {"a": PartnerChoice("b"), "b": PartnerChoice("c"),
                                "c": PartnerChoice("b")})
    assert ev.soft_score == pytest.approx(1 - 1 / 3) and not ev.solved


def test_matching_inconsistency_kinds():
    p3 = path(3)
    ev = evaluate_matching(p3, {"a": PartnerChoice("c"), "b": PartnerChoice(None),
                                "c": PartnerChoice("zed")})
    # a picks non-neighbor (b), c picks non-existent (b); b is None but no None neighbor
    assert ev.soft_score == pytest.approx(1 - 2 / 3)
    ev = evaluate_matching(p3, {"a": PartnerChoice(None), "b": PartnerChoice(None),
                                "c": PartnerChoice(None)})
    assert ev.soft_score == 0.0  # every agent has a None neighbour


def test_leader_examples():
    ev = evaluate_leader_election({"a": YesNo(True), "b": YesNo(False), "c": YesNo(False),
                                   "d": YesNo(False)})
    assert ev.solved and ev.soft_score == 1.0
    assert not evaluate_leader_election({"a": YesNo(False), "b": YesNo(False)}).solved
    assert not evaluate_leader_election({"a": YesNo(True), "b": YesNo(True),
                                         "c": YesNo(False)}).solved
    assert evaluate_leader_election({"a": YesNo(True), "b": Invalid()}).solved


def test_consensus_examples():
    assert evaluate_consensus({k: Bit(1) for k in "abcd"}).solved
    assert evaluate_consensus({k: Bit(0) for k in "abc"}).solved
    assert not evaluate_consensus({"a": Bit(0), "b": Bit(1), "c": Bit(1)}).solved
    assert not evaluate_consensus({"a": Bit(0), "b": Invalid()}).solved


def test_oracle_examples():
    s = star(3)
    assert not oracle_check(TaskKind.VERTEX_COVER, s, yesno(s, [1, 1, 1, 1]))
    c4 = cycle(4)
    assert oracle_check(TaskKind.COLORING, c4, groups(c4, [1, 2, 1, 2]))


def test_oracle_refuses_large():
    t = gen_small_world(16, 4, 0.3, seed=0)
    with pytest.raises(ParameterError):
        oracle_check(TaskKind.COLORING, t, {})


# -- structural properties --------------------------------------------------

def all_connected_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        edges = [p for i, p in enumerate(pairs) if mask >> i & 1]
        t = make_topology(n, edges)
        if t.is_connected():
            yield t


def small_graph_sample():
    graphs = []
    for n in range(2, 6):
        graphs.extend(all_connected_graphs(n))
    rng = random.Random(0)
    for _ in range(40):
        n = rng.randint(6, 8)
        graphs.append(gen_small_world(n, 2 if n < 6 else 4, 0.5, seed=rng.getrandbits(32))
                      .with_labels([f"v{i}" for i in range(n)]))
    return graphs


SMALL_GRAPHS = small_graph_sample()


def test_minimality_equivalence_exhaustive():
    for t in SMALL_GRAPHS:
        names = t.names()
        adj = {t.name(i): {t.name(w) for w in t.neighbors(i)} for i in range(t.n)}
        edges = t.named_edges()
        for mask in range(1 << t.n):
            chosen = {names[i] for i in range(t.n) if mask >> i & 1}
            if not all(u in chosen or v in chosen for u, v in edges):
                continue
            local = all(adj[c] - chosen for c in chosen)
            removal = all(any(u not in chosen - {c} and v not in chosen - {c} for u, v in edges)
                          for c in chosen)
            assert local == removal


def maximal_independent_sets(t):
    names = t.names()
    adj = {t.name(i): {t.name(w) for w in t.neighbors(i)} for i in range(t.n)}
    for mask in range(1 << t.n):
        s = {names[i] for i in range(t.n) if mask >> i & 1}
        if any(adj[v] & s for v in s):
            continue
        if all(v in s or adj[v] & s for v in names):
            yield s


def test_mis_complement_is_solved_cover():
    for t in SMALL_GRAPHS:
        for mis in maximal_independent_sets(t):
            answers = {v: YesNo(v not in mis) for v in t.names()}
            assert evaluate_vertex_cover(t, answers).solved


# -- differential test against the oracle ----------------------------------

def random_answers(kind, t, rng):
    """Random answer maps, biased so that a fair share are (near-)solutions."""
    names = t.names()
    k = t.max_degree() + 1
    near = rng.random() < 0.5
    ans = {}
    if kind is TaskKind.COLORING:
        order = names[:]
        rng.shuffle(order)
        color = {}
        for v in order:
            used = {color.get(t.name(w)) for w in t.neighbors(t.index_of(v))}
            color[v] = min(c for c in range(1, k + 1) if c not in used) if near \
                else rng.randint(1, k + 1)
        ans = {v: GroupChoice(c) for v, c in color.items()}
    elif kind is TaskKind.VERTEX_COVER:
        if near:
            order = names[:]
            rng.shuffle(order)
            mis = set()
            for v in order:
                if not any(t.name(w) in mis for w in t.neighbors(t.index_of(v))):
                    mis.add(v)
            ans = {v: YesNo(v not in mis) for v in names}
        else:
            ans = {v: YesNo(rng.random() < 0.5) for v in names}
    elif kind is TaskKind.MATCHING:
        if near:
            order = list(t.named_edges())
            rng.shuffle(order)
            partner = {}
            for u, v in order:
                if u not in partner and v not in partner:
                    partner[u], partner[v] = v, u
            ans = {v: PartnerChoice(partner.get(v)) for v in names}
        else:
            for v in names:
                opts = t.neighbor_names(t.index_of(v)) + [None, rng.choice(names), "ghost"]
                ans[v] = PartnerChoice(rng.choice(opts))
    elif kind is TaskKind.LEADER_ELECTION:
        p = 1.0 / len(names) if near else 0.5
        ans = {v: YesNo(rng.random() < p) for v in names}
    else:
        p = 0.05 if near else 0.5
        ans = {v: Bit(int(rng.random() < p)) for v in names}
    # occasional perturbation / invalid entries
    if rng.random() < 0.3:
        v = rng.choice(names)
        ans[v] = Invalid("garbled") if rng.random() < 0.3 else ans[names[0]]
    return ans


@pytest.mark.parametrize("kind", ALL_TASKS)
def test_evaluator_matches_oracle_random(kind, small_suite_graphs):
    rng = random.Random(ALL_TASKS.index(kind))
    graphs = small_suite_graphs + SMALL_GRAPHS[:50]
    solved_seen = 0
    for trial in range(3000):
        t = graphs[trial % len(graphs)]
        ans = random_answers(kind, t, rng)
        ev = evaluate(kind, t, ans)
        assert ev.solved == oracle_check(kind, t, ans)
        assert 0.0 <= ev.soft_score <= 1.0
        if ev.solved:
            assert ev.soft_score == 1.0
            solved_seen += 1
    assert solved_seen > 50


@pytest.mark.parametrize("kind", ALL_TASKS)
def test_permutation_invariance(kind):
    rng = random.Random(1)
    for t in SMALL_GRAPHS[::7]:
        ans = random_answers(kind, t, rng)
        perm = list(range(t.n))
        rng.shuffle(perm)
        relabel = {t.name(i): f"x{perm[i]}" for i in range(t.n)}
        t2 = t.with_labels([relabel[t.name(i)] for i in range(t.n)])

        def rename(a):
            if isinstance(a, PartnerChoice) and a.partner in relabel:
                return PartnerChoice(relabel[a.partner])
            return a
        ans2 = {relabel[k]: rename(v) for k, v in ans.items()}
        e1, e2 = evaluate(kind, t, ans), evaluate(kind, t2, ans2)
        assert (e1.soft_score, e1.solved) == (e2.soft_score, e2.solved)


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_soft_score_range_property(data):
    t = data.draw(st.sampled_from(SMALL_GRAPHS))
    kind = data.draw(st.sampled_from(ALL_TASKS))
    seed = data.draw(st.integers(0, 10**6))
    ans = random_answers(kind, t, random.Random(seed))
    ev = evaluate(kind, t, ans)
    assert 0.0 <= ev.soft_score <= 1.0
    assert not ev.solved or ev.soft_score == 1.0


def test_task_spec_binding():
    s = star(3)
    spec = TaskSpec.for_topology("Coloring", s)
    assert spec.delta_plus_one == 4
    assert "exactly 4 groups" in spec.prompts[1]
    assert spec.parse_answer("### Final Answer ### Group 4") == GroupChoice(4)
    assert TaskKind.parse("leader_election") is TaskKind.LEADER_ELECTION
    assert TaskKind.CONSENSUS.is_global and not TaskKind.MATCHING.is_global
