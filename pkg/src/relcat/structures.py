"""Graph representations and automorphism-orbit machinery for the coding graph.

Three views of the same object: FiniteGraph (concrete, indexed vertices),
StageGraph (a finite graph tagged with its stage number), and
SymbolicCodingGraph (the limit graph, with possibly-infinite chain lengths
stored symbolically so orbit questions can be answered exactly).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .approx import OMEGA

# fixed tag order used to break ties in canonical vertex enumerations
TAGS = ("u", "u'", "v", "w", "v'", "w'")
TAG_RANK = {t: i for i, t in enumerate(TAGS)}

SPINE_TAGS = frozenset({"u", "u'"})
CHAIN_TAGS = frozenset({"v", "w", "v'", "w'"})


@dataclass(frozen=True, order=False)
class Vertex:
    """A named vertex of the coding graph.

    Spine vertices u(x), u'(x) carry no y; chain vertices v/w/v'/w' carry the
    position y along their chain (0 = attached to the spine).
    """

    tag: str
    x: int
    y: int = 0

    def __post_init__(self) -> None:
        if self.tag not in TAG_RANK:
            raise ValueError(f"unknown tag {self.tag!r}")
        if self.tag in SPINE_TAGS and self.y != 0:
            raise ValueError("spine vertices have no chain position")
        if self.tag == "v'" and self.y not in (0, 1):
            raise ValueError("v'-chain has length at most 2")
        if self.tag == "w'" and self.y != 0:
            raise ValueError("w'-chain has length at most 1")

    @property
    def label(self) -> str:
        if self.tag in SPINE_TAGS:
            return f"{self.tag}({self.x})"
        return f"{self.tag}({self.x},{self.y})"

    def sort_key(self) -> tuple[int, int, int]:
        return (self.x, TAG_RANK[self.tag], self.y)

    def __repr__(self) -> str:  # keeps test failure output readable
        return self.label


def U(x: int) -> Vertex:
    return Vertex("u", x)


def Uprime(x: int) -> Vertex:
    return Vertex("u'", x)


def V(x: int, y: int) -> Vertex:
    return Vertex("v", x, y)


def W(x: int, y: int) -> Vertex:
    return Vertex("w", x, y)


def Vprime(x: int, y: int) -> Vertex:
    return Vertex("v'", x, y)


def Wprime(x: int, y: int = 0) -> Vertex:
    return Vertex("w'", x, y)


class FiniteGraph:
    """An undirected graph over an ordered vertex list.

    The order gives each vertex a numeric index; that numbering is the sense
    in which "the first s elements" is meant everywhere downstream.  Vertices
    may be Vertex values or opaque strings (for scrambled copies).
    """

    def __init__(
        self,
        vertices: Sequence[Vertex | str],
        edges: Iterable[tuple[int, int]],
    ) -> None:
        self.vertices: tuple[Vertex | str, ...] = tuple(vertices)
        n = len(self.vertices)
        norm = set()
        for a, b in edges:
            if a == b:
                raise ValueError("self-loop")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a},{b}) references missing vertex")
            norm.add((min(a, b), max(a, b)))
        self.edges: frozenset[tuple[int, int]] = frozenset(norm)
        self._index = {v: i for i, v in enumerate(self.vertices)}
        if len(self._index) != n:
            raise ValueError("duplicate vertex")
        adj: list[set[int]] = [set() for _ in range(n)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        self.adjacency: tuple[frozenset[int], ...] = tuple(frozenset(s) for s in adj)

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteGraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges))

    def __repr__(self) -> str:
        return f"FiniteGraph({len(self)} vertices, {len(self.edges)} edges)"

    def index_of(self, v: Vertex | str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise KeyError(f"vertex {v} not in graph") from None

    def has_vertex(self, v: Vertex | str) -> bool:
        return v in self._index

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])


@dataclass(frozen=True)
class StageGraph:
    stage: int
    graph: FiniteGraph


@dataclass(frozen=True)
class ChainRecord:
    """Per-x chain data of the symbolic graph."""

    vchain_len: int | float  # m(x)+1, or OMEGA
    wchain_len: int | float  # m(x), or OMEGA
    in_c: bool

    def __post_init__(self) -> None:
        if (self.vchain_len == OMEGA) != (self.wchain_len == OMEGA):
            raise ValueError("v- and w-chains must be infinite together")
        if self.vchain_len != OMEGA and self.vchain_len != self.wchain_len + 1:
            raise ValueError("finite chains must satisfy vlen = wlen + 1")

    @property
    def vprime_len(self) -> int:
        return 2 if self.in_c else 1

    @property
    def wprime_len(self) -> int:
        return 1 if self.in_c else 0


@dataclass(frozen=True)
class SymbolicCodingGraph:
    """The limit coding graph, chains stored by length instead of listed."""

    records: tuple[ChainRecord, ...]
    parameters: tuple[Vertex, ...] = (U(0),)

    @property
    def x_bound(self) -> int:
        return len(self.records)

    def has_vertex(self, v: Vertex) -> bool:
        if not 0 <= v.x < self.x_bound:
            return False
        r = self.records[v.x]
        if v.tag in SPINE_TAGS:
            return True
        lengths = {
            "v": r.vchain_len,
            "w": r.wchain_len,
            "v'": r.vprime_len,
            "w'": r.wprime_len,
        }
        return v.y < lengths[v.tag]

    def swap_allowed(self, x: int) -> bool:
        # v/w chains at u_x can be exchanged iff they have equal length,
        # which for a legal record means both are infinite
        r = self.records[x]
        return r.vchain_len == r.wchain_len


@dataclass(frozen=True)
class OrbitQuery:
    t1: tuple[Vertex, ...]
    t2: tuple[Vertex, ...]

    def __post_init__(self) -> None:
        if len(self.t1) != len(self.t2):
            raise ValueError("tuple length mismatch")


def orbit_equivalent(g: SymbolicCodingGraph, q: OrbitQuery) -> bool:
    """Decide whether an automorphism fixing the parameters maps t1 to t2.

    Any automorphism fixing u(0) fixes the whole spine pointwise (the spine is
    the unique two-sided ray of degree-4/degree-2 alternation from u(0)), and
    acts independently at each x by either fixing or swapping the v/w chains
    (possible iff equal length) and the v'/w' chains (never equal length under
    the construction invariants).  So the question reduces to a consistent
    choice of per-x swap flags.
    """
    for v in (*q.t1, *q.t2):
        if not g.has_vertex(v):
            raise KeyError(f"vertex {v} not in graph")
    # flag per x: None = unconstrained, False = must fix, True = must swap
    flags: dict[int, bool] = {}
    for a, b in zip(q.t1, q.t2):
        if a.tag in SPINE_TAGS or a.tag in ("v'", "w'"):
            if a != b:
                return False
            continue
        if a.x != b.x or a.y != b.y:
            return False
        if a.tag == b.tag:
            need = False
        elif {a.tag, b.tag} == {"v", "w"}:
            need = True
        else:
            return False
        prev = flags.get(a.x)
        if prev is not None and prev != need:
            return False
        flags[a.x] = need
    return all(not need or g.swap_allowed(x) for x, need in flags.items())


def enumerate_isomorphisms(
    a: FiniteGraph,
    b: FiniteGraph,
    fixed: dict[int, int] | None = None,
) -> Iterator[dict[int, int]]:
    """Yield all edge-preserving bijections a -> b extending `fixed`.

    Plain backtracking with degree pruning; only meant for oracle-sized graphs.
    """
    n = len(a)
    if n != len(b):
        return
    deg_b: dict[int, list[int]] = {}
    for j in range(n):
        deg_b.setdefault(b.degree(j), []).append(j)
    mapping: dict[int, int] = {}
    used: set[int] = set()
    if fixed:
        for i, j in fixed.items():
            if a.degree(i) != b.degree(j) or j in used:
                return
            mapping[i] = j
            used.add(j)
    order = [i for i in range(n) if i not in mapping]
    # most-constrained first: high degree, then neighbors of placed vertices
    order.sort(key=lambda i: -a.degree(i))

    def consistent(i: int, j: int) -> bool:
        for i2, j2 in mapping.items():
            if a.has_edge(i, i2) != b.has_edge(j, j2):
                return False
        return True

    def rec(k: int) -> Iterator[dict[int, int]]:
        if k == len(order):
            yield dict(mapping)
            return
        i = order[k]
        for j in deg_b.get(a.degree(i), ()):
            if j in used or not consistent(i, j):
                continue
            mapping[i] = j
            used.add(j)
            yield from rec(k + 1)
            del mapping[i]
            used.discard(j)

    yield from rec(0)


BRUTE_FORCE_BOUND = 10

_automorphism_cache: dict[tuple, tuple[dict[int, int], ...]] = {}


def _automorphisms(g: FiniteGraph, fixed_idx: tuple[int, ...]) -> tuple[dict[int, int], ...]:
    key = (g, fixed_idx)
    if key not in _automorphism_cache:
        fixed = {i: i for i in fixed_idx}
        _automorphism_cache[key] = tuple(enumerate_isomorphisms(g, g, fixed))
    return _automorphism_cache[key]


def orbit_equivalent_bruteforce(
    g: FiniteGraph,
    q: OrbitQuery,
    params: Sequence[Vertex | str] = (),
    bound: int = BRUTE_FORCE_BOUND,
) -> bool:
    """Oracle: exhaustive automorphism search on a small finite graph."""
    if len(g) > bound:
        raise ValueError(f"graph has {len(g)} vertices, oracle bound is {bound}")
    t1 = tuple(g.index_of(v) for v in q.t1)
    t2 = tuple(g.index_of(v) for v in q.t2)
    fixed_idx = tuple(g.index_of(p) for p in params)
    for auto in _automorphisms(g, fixed_idx):
        if all(auto[i] == j for i, j in zip(t1, t2)):
            return True
    return False


def _chain_lengths(r: ChainRecord, chain_cap: int) -> dict[str, int]:
    clip = lambda n: chain_cap if n == OMEGA else min(int(n), chain_cap)
    return {
        "v": clip(r.vchain_len),
        "w": clip(r.wchain_len),
        "v'": min(r.vprime_len, chain_cap),
        "w'": min(r.wprime_len, chain_cap),
    }


def coding_edges(vertices: Sequence[Vertex]) -> set[tuple[int, int]]:
    """All coding-graph edges whose endpoints both occur in `vertices`.

    Edge forms: spine u(x)-u'(x)-u(x+1); chain heads attach v/w to u(x) and
    v'/w' to u'(x); consecutive chain vertices are linked.
    """
    index = {v: i for i, v in enumerate(vertices)}

    def parent(v: Vertex) -> Vertex | None:
        if v.tag == "u":
            return Uprime(v.x - 1) if v.x > 0 else None
        if v.tag == "u'":
            return U(v.x)
        if v.y > 0:
            return Vertex(v.tag, v.x, v.y - 1)
        return U(v.x) if v.tag in ("v", "w") else Uprime(v.x)

    edges = set()
    for v, i in index.items():
        p = parent(v)
        if p is not None and p in index:
            j = index[p]
            edges.add((min(i, j), max(i, j)))
    return edges


def truncate(
    g: SymbolicCodingGraph,
    chain_cap: int,
    x_cap: int | None = None,
    stub: bool = False,
) -> FiniteGraph:
    """Finite approximation: chains clipped to chain_cap, spine to x_cap.

    Vertex order is structural: for each x in turn, the spine pair then each
    chain in tag order.  With stub=True a bare spine continuation
    u(K), u'(K), u(K+1) is appended past the cut; equal-length truncated
    infinite chains then stop masquerading as each other's finite twins less
    often (the extra spine breaks path symmetries at the frontier).
    """
    if chain_cap < 1:
        raise ValueError("chain_cap must be >= 1")
    k = g.x_bound if x_cap is None else min(x_cap, g.x_bound)
    vertices: list[Vertex] = []
    for x in range(k):
        r = g.records[x]
        lengths = _chain_lengths(r, chain_cap)
        vertices.append(U(x))
        vertices.append(Uprime(x))
        for tag in ("v", "w", "v'", "w'"):
            vertices.extend(Vertex(tag, x, y) for y in range(lengths[tag]))
    if stub and k > 0:
        vertices.extend([U(k), Uprime(k), U(k + 1)])
    return FiniteGraph(vertices, coding_edges(vertices))


def induced_subgraph(small: FiniteGraph, big: FiniteGraph) -> bool:
    """True iff small's vertices all occur in big and edges agree exactly."""
    for v in small.vertices:
        if not big.has_vertex(v):
            return False
    for i, a in enumerate(small.vertices):
        for j in range(i + 1, len(small)):
            b = small.vertices[j]
            if small.has_edge(i, j) != big.has_edge(big.index_of(a), big.index_of(b)):
                return False
    return True


def _label(v: Vertex | str) -> str:
    return v.label if isinstance(v, Vertex) else v


def export(g: FiniteGraph, fmt: str) -> str:
    if fmt == "dot":
        lines = ["graph coding {"]
        for v in g.vertices:
            lines.append(f'  "{_label(v)}";')
        for i, j in sorted(g.edges):
            lines.append(f'  "{_label(g.vertices[i])}" -- "{_label(g.vertices[j])}";')
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt == "adjacency-json":
        doc = {
            "vertices": [_label(v) for v in g.vertices],
            "edges": sorted([i, j] for i, j in g.edges),
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def all_tuples(vertices: Sequence[Vertex], length: int) -> Iterator[tuple[Vertex, ...]]:
    yield from itertools.product(vertices, repeat=length)
