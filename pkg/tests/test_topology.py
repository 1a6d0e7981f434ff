import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netcoord.errors import ParameterError, StructureError
from netcoord.topology import (
    ALL_FAMILIES,
    SCALING_SIZES,
    GraphFamily,
    Topology,
    gen_benchmark_suite,
    gen_delaunay,
    gen_scale_free,
    gen_small_world,
    generate,
    iter_suite,
    metrics,
)

from conftest import complete, path, star


def bfs_connected(n, edges):
    adj = {i: set() for i in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, stack = {0}, [0]
    while stack:
        u = stack.pop()
        for w in adj[u] - seen:
            seen.add(w)
            stack.append(w)
    return len(seen) == n


def floyd_warshall(n, edges):
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v in edges:
        d[u, v] = d[v, u] = 1
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def test_small_world_without_rewiring_is_ring():
    t = gen_small_world(4, 2, 0.0, seed=7)
    assert t.edges == ((0, 1), (0, 3), (1, 2), (2, 3))


def test_small_world_deterministic():
    a = gen_small_world(8, 4, 0.3, seed=11)
    b = gen_small_world(8, 4, 0.3, seed=11)
    assert a.edges == b.edges


def test_small_world_degrees_recomputed():
    t = gen_small_world(16, 4, 0.3, seed=5)
    deg = Counter()
    for u, v in t.edges:
        deg[u] += 1
        deg[v] += 1
    assert bfs_connected(16, t.edges)
    assert max(deg.values()) >= 4
    assert metrics(t).max_degree == max(deg.values())


@pytest.mark.parametrize("args", [(3, 2, 0.1), (8, 3, 0.1), (8, 8, 0.1), (8, 4, 1.5), (8, 0, 0.1)])
def test_small_world_rejects_bad_params(args):
    with pytest.raises(ParameterError):
        gen_small_world(*args, seed=0)


def test_scale_free_tree_for_m1():
    t = gen_scale_free(4, 1, seed=3)
    assert len(t.edges) == 3
    assert bfs_connected(4, t.edges)


def test_scale_free_edge_count():
    t = gen_scale_free(8, 2, seed=3)
    assert len(t.edges) == 2 * (8 - 2)


def test_scale_free_deterministic_and_validated():
    assert gen_scale_free(12, 2, seed=9).edges == gen_scale_free(12, 2, seed=9).edges
    with pytest.raises(ParameterError):
        gen_scale_free(4, 4, seed=0)
    with pytest.raises(ParameterError):
        gen_scale_free(4, 0, seed=0)


def test_delaunay_triangle():
    t = gen_delaunay(3, seed=1)
    assert t.edges == ((0, 1), (0, 2), (1, 2))


def test_delaunay_planar_and_connected():
    t = gen_delaunay(8, seed=2)
    assert len(t.edges) <= 3 * 8 - 6
    touched = {x for e in t.edges for x in e}
    assert touched == set(range(8))
    assert bfs_connected(8, t.edges)


def test_delaunay_rejects_tiny():
    with pytest.raises(ParameterError):
        gen_delaunay(2, seed=0)


def test_metrics_known_graphs():
    m = metrics(path(4))
    assert (m.diameter, m.max_degree) == (3, 2)
    m = metrics(complete(4))
    assert (m.diameter, m.max_degree) == (1, 3)
    m = metrics(star(3))
    assert (m.diameter, m.max_degree) == (2, 3)
    assert m.degree_sequence == (3, 1, 1, 1)


def test_metrics_disconnected():
    t = Topology(4, ((0, 1), (2, 3)), GraphFamily.DELAUNAY, 0)
    with pytest.raises(StructureError):
        metrics(t)


def test_topology_rejects_bad_edges():
    with pytest.raises(StructureError):
        Topology(3, ((0, 0),), GraphFamily.DELAUNAY, 0)
    with pytest.raises(StructureError):
        Topology(3, ((0, 1), (1, 0)), GraphFamily.DELAUNAY, 0)
    with pytest.raises(StructureError):
        Topology(3, ((0, 3),), GraphFamily.DELAUNAY, 0)


def test_default_suite_shape(default_suite):
    assert len(default_suite) == 27
    assert Counter(e.family for e in default_suite) == {f: 9 for f in ALL_FAMILIES}
    assert Counter(e.size for e in default_suite) == {4: 9, 8: 9, 16: 9}
    seeds = [e.topology.seed for e in default_suite]
    assert len(set(seeds)) == 27


def test_single_cell_suite():
    assert len(gen_benchmark_suite([4], [GraphFamily.SCALE_FREE], 1, seed=0)) == 1


def test_scaling_suite_count():
    suite = gen_benchmark_suite(SCALING_SIZES, seed=1)
    assert len(suite) == 81
    assert all(bfs_connected(t.n, t.edges) for t in suite)


def test_suite_deterministic():
    a = [t.to_text() for t in gen_benchmark_suite(seed=4)]
    b = [t.to_text() for t in gen_benchmark_suite(seed=4)]
    assert a == b
    c = [t.to_text() for t in gen_benchmark_suite(seed=5)]
    assert a != c


def test_suite_properties(default_suite):
    for e in default_suite:
        t = e.topology
        assert t.n == e.size
        assert bfs_connected(t.n, t.edges)
        assert all(u < v for u, v in t.edges)
        assert len(set(t.edges)) == len(t.edges)
        if e.family is GraphFamily.DELAUNAY:
            assert len(t.edges) <= 3 * t.n - 6


def test_metrics_match_brute_force_small(default_suite):
    for e in default_suite:
        t = e.topology
        if t.n > 8:
            continue
        d = floyd_warshall(t.n, t.edges)
        deg = [sum(1 for edge in t.edges if i in edge) for i in range(t.n)]
        m = metrics(t)
        assert m.diameter == int(d.max())
        assert m.max_degree == max(deg)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 8), seed=st.integers(0, 2**32),
       family=st.sampled_from(list(GraphFamily)))
def test_metrics_property(n, seed, family):
    if family is GraphFamily.SMALL_WORLD and n < 4:
        n = 4
    t = generate(family, n, seed)
    d = floyd_warshall(t.n, t.edges)
    m = metrics(t)
    assert bfs_connected(t.n, t.edges)
    assert m.diameter == int(d.max())
    assert 1 <= m.diameter <= n - 1
    assert m.max_degree == max(m.degree_sequence)


def test_text_roundtrip_bit_exact(default_suite):
    for e in default_suite:
        text = e.topology.to_text()
        back = Topology.from_text(text)
        assert back.to_text() == text
        assert back.edges == e.topology.edges
        assert back.family is e.topology.family and back.seed == e.topology.seed


def test_text_format_layout():
    t = gen_small_world(4, 2, 0.0, seed=7)
    assert t.to_text() == "4 SmallWorld 7\n0 1\n0 3\n1 2\n2 3\n"


def test_suite_instance_order():
    entries = list(iter_suite([4, 8], [GraphFamily.DELAUNAY], per_cell=2, seed=0))
    assert [(e.size, e.instance) for e in entries] == [(4, 0), (4, 1), (8, 0), (8, 1)]


def test_family_parse():
    assert GraphFamily.parse("small_world") is GraphFamily.SMALL_WORLD
    assert GraphFamily.parse("ScaleFree") is GraphFamily.SCALE_FREE
    assert GraphFamily.parse("ba") is GraphFamily.SCALE_FREE
    with pytest.raises(ParameterError):
        GraphFamily.parse("erdos")
    assert list(itertools.islice(iter(GraphFamily), 1)) == [GraphFamily.SMALL_WORLD]
