"""Benchmark network topologies: generators, metrics and the text exchange format.

Three random graph families are supported: Watts-Strogatz small-world graphs,
Barabasi-Albert preferential attachment graphs and Delaunay triangulations of
uniform random points in the unit square. Every generator is a pure function of
its parameters and seed. Node indices are 0-based; human-readable agent names
are attached later by the protocol layer via :meth:`Topology.with_labels`.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import networkx as nx
import numpy as np
from scipy.spatial import Delaunay, QhullError

from .errors import GenerationError, ParameterError, StructureError
from .seeding import derive_seed

MAX_ATTEMPTS = 64

BENCHMARK_SIZES = (4, 8, 16)
SCALING_SIZES = tuple(range(20, 101, 10))
DEFAULT_PER_CELL = 3


class GraphFamily(str, enum.Enum):
    SMALL_WORLD = "SmallWorld"
    SCALE_FREE = "ScaleFree"
    DELAUNAY = "Delaunay"

    @classmethod
    def parse(cls, value: str | GraphFamily) -> GraphFamily:
        if isinstance(value, cls):
            return value
        key = str(value).replace("_", "").replace("-", "").lower()
        for fam in cls:
            if fam.value.lower() == key or fam.name.replace("_", "").lower() == key:
                return fam
        aliases = {"ws": cls.SMALL_WORLD, "ba": cls.SCALE_FREE, "dt": cls.DELAUNAY}
        if key in aliases:
            return aliases[key]
        raise ParameterError(f"unknown graph family {value!r}")


ALL_FAMILIES = tuple(GraphFamily)


@dataclass(frozen=True)
class Topology:
    node_count: int
    edges: tuple[tuple[int, int], ...]
    family: GraphFamily
    seed: int
    labels: tuple[str, ...] | None = None
    _adj: tuple[tuple[int, ...], ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        canon = _canonical_edges(self.edges, self.node_count)
        object.__setattr__(self, "edges", canon)
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in canon:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.node_count or len(set(labels)) != len(labels):
                raise ParameterError("labels must be unique and cover every node")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def ref(self) -> str:
        return f"{self.family.value}-n{self.node_count}-s{self.seed}"

    def neighbors(self, node: int) -> tuple[int, ...]:
        return self._adj[node]

    def degree(self, node: int) -> int:
        return len(self._adj[node])

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def is_connected(self) -> bool:
        if self.node_count == 0:
            return False
        return len(_bfs_distances(self._adj, 0)) == self.node_count

    def name(self, node: int) -> str:
        if self.labels is None:
            return str(node)
        return self.labels[node]

    def names(self) -> list[str]:
        return [self.name(i) for i in range(self.node_count)]

    def index_of(self, name: str) -> int:
        if self.labels is None:
            return int(name)
        return self.labels.index(name)

    def neighbor_names(self, node: int) -> list[str]:
        return sorted(self.name(w) for w in self._adj[node])

    def named_edges(self) -> list[tuple[str, str]]:
        return [(self.name(u), self.name(v)) for u, v in self.edges]

    def with_labels(self, labels: Sequence[str] | None) -> Topology:
        return Topology(self.node_count, self.edges, self.family, self.seed,
                        tuple(labels) if labels is not None else None)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.node_count))
        g.add_edges_from(self.edges)
        return g

    # -- exchange format ---------------------------------------------------

    def to_text(self) -> str:
        lines = [f"{self.node_count} {self.family.value} {self.seed}"]
        lines.extend(f"{u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Topology:
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or len(rows[0]) != 3:
            raise ParameterError("topology file needs a 'n family seed' header")
        n, family, seed = rows[0]
        edges = []
        for row in rows[1:]:
            if len(row) != 2:
                raise ParameterError(f"bad edge line {' '.join(row)!r}")
            edges.append((int(row[0]), int(row[1])))
        return cls(int(n), tuple(edges), GraphFamily.parse(family), int(seed))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> Topology:
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class GraphMetrics:
    max_degree: int
    diameter: int
    degree_sequence: tuple[int, ...]


def _canonical_edges(edges: Iterable[Sequence[int]], n: int) -> tuple[tuple[int, int], ...]:
    seen: set[tuple[int, int]] = set()
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise StructureError(f"self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise StructureError(f"edge ({u}, {v}) outside [0, {n})")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise StructureError(f"duplicate edge {key}")
        seen.add(key)
    return tuple(sorted(seen))


def _bfs_distances(adj: Sequence[Sequence[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def metrics(t: Topology) -> GraphMetrics:
    """Exact max degree (degree scan) and diameter (BFS from every node)."""
    adj = [t.neighbors(i) for i in range(t.node_count)]
    diameter = 0
    for s in range(t.node_count):
        dist = _bfs_distances(adj, s)
        if len(dist) != t.node_count:
            raise StructureError("diameter undefined: topology is disconnected")
        diameter = max(diameter, max(dist.values()))
    degrees = tuple(len(a) for a in adj)
    return GraphMetrics(max(degrees, default=0), diameter, degrees)


# -- generators -------------------------------------------------------------

def _from_nx(g: nx.Graph, family: GraphFamily, seed: int) -> Topology:
    return Topology(g.number_of_nodes(), tuple(g.edges()), family, seed)


def gen_small_world(n: int, k: int = 4, p: float = 0.3, seed: int = 0) -> Topology:
    """Watts-Strogatz ring lattice with rewiring, resampled until connected."""
    if n < 4:
        raise ParameterError(f"small-world graphs need n >= 4, got {n}")
    if k % 2 or not 2 <= k < n:
        raise ParameterError(f"k must be even with 2 <= k < n, got k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"rewiring probability {p} outside [0, 1]")
    for attempt in range(MAX_ATTEMPTS):
        g = nx.watts_strogatz_graph(n, k, p, seed=derive_seed(seed, "ws", attempt))
        if nx.is_connected(g):
            return _from_nx(g, GraphFamily.SMALL_WORLD, seed)
    raise GenerationError(
        f"no connected small-world graph (n={n}, k={k}, p={p}) in {MAX_ATTEMPTS} attempts")


def gen_scale_free(n: int, m: int = 2, seed: int = 0) -> Topology:
    """Barabasi-Albert preferential attachment; m*(n-m) edges, always connected."""
    if not 1 <= m < n:
        raise ParameterError(f"need 1 <= m < n, got m={m}, n={n}")
    g = nx.barabasi_albert_graph(n, m, seed=derive_seed(seed, "ba"))
    return _from_nx(g, GraphFamily.SCALE_FREE, seed)


def gen_delaunay(n: int, seed: int = 0) -> Topology:
    """Delaunay triangulation of n uniform points in the unit square."""
    if n < 3:
        raise ParameterError(f"Delaunay graphs need n >= 3, got {n}")
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng(derive_seed(seed, "dt", attempt))
        points = rng.random((n, 2))
        try:
            tri = Delaunay(points)
        except QhullError:
            continue
        if len(tri.coplanar):  # duplicate points are dropped by qhull
            continue
        edges = set()
        for simplex in tri.simplices:
            for a, b in itertools.combinations(sorted(int(x) for x in simplex), 2):
                edges.add((a, b))
        return Topology(n, tuple(edges), GraphFamily.DELAUNAY, seed)
    raise GenerationError(f"degenerate point sets for n={n} in {MAX_ATTEMPTS} attempts")


def default_params(family: GraphFamily, n: int) -> dict:
    """Generator parameters used when a config does not override them.

    Small graphs get sparser settings: k=2 / m=1 for n=4 keeps the 4-node
    instances from collapsing into near-complete graphs.
    """
    family = GraphFamily.parse(family)
    if family is GraphFamily.SMALL_WORLD:
        return {"k": 2 if n <= 4 else 4, "p": 0.3}
    if family is GraphFamily.SCALE_FREE:
        return {"m": 1 if n <= 4 else 2}
    return {}


def generate(family: GraphFamily | str, n: int, seed: int, **params) -> Topology:
    family = GraphFamily.parse(family)
    kwargs = {**default_params(family, n), **params}
    if family is GraphFamily.SMALL_WORLD:
        return gen_small_world(n, seed=seed, **kwargs)
    if family is GraphFamily.SCALE_FREE:
        return gen_scale_free(n, seed=seed, **kwargs)
    return gen_delaunay(n, seed=seed, **kwargs)


@dataclass(frozen=True)
class SuiteEntry:
    size: int
    family: GraphFamily
    instance: int
    topology: Topology


def iter_suite(sizes: Sequence[int] = BENCHMARK_SIZES,
               families: Sequence[GraphFamily | str] = ALL_FAMILIES,
               per_cell: int = DEFAULT_PER_CELL,
               seed: int = 0,
               params: dict | None = None) -> Iterator[SuiteEntry]:
    """Yield suite topologies in (size, family, instance) order.

    ``params`` maps a family name to generator overrides, e.g.
    ``{"SmallWorld": {"p": 0.1}}``.
    """
    if not sizes:
        raise ParameterError("sizes must be non-empty")
    if per_cell < 1:
        raise ParameterError("per_cell must be >= 1")
    fams = [GraphFamily.parse(f) for f in families]
    overrides = {GraphFamily.parse(k): v for k, v in (params or {}).items()}
    for size in sizes:
        for fam in fams:
            for i in range(per_cell):
                topo_seed = derive_seed(seed, "suite", int(size), fam.value, i)
                topo = generate(fam, int(size), topo_seed, **overrides.get(fam, {}))
                yield SuiteEntry(int(size), fam, i, topo)


def gen_benchmark_suite(sizes: Sequence[int] = BENCHMARK_SIZES,
                        families: Sequence[GraphFamily | str] = ALL_FAMILIES,
                        per_cell: int = DEFAULT_PER_CELL,
                        seed: int = 0,
                        params: dict | None = None) -> list[Topology]:
    return [e.topology for e in iter_suite(sizes, families, per_cell, seed, params)]
