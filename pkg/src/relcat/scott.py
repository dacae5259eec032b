"""Orbit-defining formula families and the guided isomorphism construction.

A family here is a list of formulas with parameters whose satisfaction classes
are single automorphism orbits (condition 2) and which cover every tuple in a
declared range (condition 1).  The workhorse formula shape is the *diagram
formula* of a finite truncation: the conjunction of all its edges and all
pairwise inequalities, with chosen vertices exposed as free slots and the
family parameters exposed as parameter terms.  On trees, an injective
edge-preserving map is automatically induced, so satisfiers of a diagram
formula are exactly embeddings of the truncation — and over the truncation
itself, exactly the automorphisms fixing the parameters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .approx import OMEGA
from .formulas import (
    GLOBAL_INDEX,
    ExistentialFormula,
    defining_formula_search,
    evaluate,
    find_satisfying_tuples,
)
from .structures import (
    FiniteGraph,
    OrbitQuery,
    SymbolicCodingGraph,
    Vertex,
    orbit_equivalent,
    truncate,
)


class NoExtensionError(RuntimeError):
    """No formula/witness pair extends the partial map (bad family, bad
    parameter image, or non-isomorphic inputs)."""


class ArityGapError(RuntimeError):
    pass


def diagram_formula(
    g: FiniteGraph,
    slots: Sequence[Vertex | str],
    params: Sequence[Vertex | str],
) -> ExistentialFormula:
    """The atomic diagram of g with `slots` free and `params` as parameters.

    Every vertex gets a term (param > slot > fresh bound variable, in that
    priority); literals are every edge, an all-pairs inequality, and equality
    pins for slots that coincide with parameters or with earlier slots.
    """
    primary: dict[int, tuple[str, int]] = {}
    for i, p in enumerate(params):
        primary.setdefault(g.index_of(p), ("a", i + 1))
    eq_pins = []
    for i, v in enumerate(slots):
        idx = g.index_of(v)
        if idx in primary:
            eq_pins.append(("eq", ("z", i + 1), primary[idx]))
        else:
            primary[idx] = ("z", i + 1)
    q = 0
    for idx in range(len(g)):
        if idx not in primary:
            q += 1
            primary[idx] = ("y", q)
    literals = list(eq_pins)
    for i, j in g.edges:
        literals.append(("edge", primary[i], primary[j]))
    for i, j in itertools.combinations(range(len(g)), 2):
        literals.append(("neq", primary[i], primary[j]))
    return ExistentialFormula(len(slots), q, tuple(literals))


@dataclass(frozen=True)
class FamilyEntry:
    arity: int
    formula: ExistentialFormula
    source: tuple[Vertex, ...]  # the tuple the entry was generated for


@dataclass(frozen=True)
class ScottFamily:
    """A finite prefix of an enumerated formula family plus its generating rule.

    `entries` lists the explicitly materialized formulas in enumeration order;
    `extension` is the rule that produces the entry for any further tuple on
    demand (the enumeration is by rule, so only a prefix is ever stored).
    `world` is the finite truncation the entries were built over.
    """

    parameters: tuple[Vertex, ...]
    entries: tuple[FamilyEntry, ...]
    world: FiniteGraph = field(compare=False)
    covered: tuple[tuple[Vertex, ...], ...] = ()  # the declared coverage range
    extension: Callable[[FiniteGraph, Sequence[Vertex | str], Sequence[Vertex | str]], ExistentialFormula] = field(
        compare=False, default=diagram_formula
    )

    def entries_of_arity(self, n: int) -> list[FamilyEntry]:
        return [e for e in self.entries if e.arity == n]

    def covered_tuples(self) -> tuple[tuple[Vertex, ...], ...]:
        return self.covered if self.covered else tuple(e.source for e in self.entries)

    def has_code(self, code: int) -> bool:
        """Whether the canonical formula with this code occurs in the prefix."""
        phi = GLOBAL_INDEX.formula_at(code)
        return any(e.formula == phi for e in self.entries)


def default_chain_cap(g: SymbolicCodingGraph) -> int:
    """Large enough that truncated infinite chains outrun every finite one."""
    finite = [int(r.vchain_len) for r in g.records if r.vchain_len != OMEGA]
    return max(3, max(finite, default=0) + 1)


def _head_vertices(g: SymbolicCodingGraph, world: FiniteGraph) -> list[Vertex]:
    """Spine vertices and chain heads, x-major: the tuple universe for pairs."""
    out: list[Vertex] = []
    for x in range(g.x_bound):
        for v in (Vertex("u", x), Vertex("u'", x), Vertex("v", x, 0), Vertex("w", x, 0), Vertex("v'", x, 0)):
            if world.has_vertex(v):
                out.append(v)
    return out


def generate_scott_family(
    g: SymbolicCodingGraph,
    tuple_bound: int,
    budget: int = 1,
    pair_vertex_count: int = 12,
    search_vertex_count: int = 2,
) -> ScottFamily:
    """Materialize a family prefix covering tuples up to tuple_bound.

    Small searched formulas come first (so the very first entries are the
    shortest orbit-definers the enumeration finds, e.g. the parameter pin);
    then one diagram entry per vertex of the truncation, then diagram entries
    for tuples over the head-vertex universe.
    """
    world = truncate(g, default_chain_cap(g))
    entries: list[FamilyEntry] = []
    covered: list[tuple[Vertex, ...]] = []
    seen: set[ExistentialFormula] = set()

    def add(tup: tuple[Vertex, ...], phi: ExistentialFormula) -> None:
        if phi not in seen:
            seen.add(phi)
            entries.append(FamilyEntry(len(tup), phi, tup))

    if tuple_bound >= 1:
        for v in world.vertices[:search_vertex_count]:
            assert isinstance(v, Vertex)
            phi = defining_formula_search(g, (v,), mode="orbit", budget=budget)
            if phi is not None:
                add((v,), phi)
        for v in world.vertices:
            assert isinstance(v, Vertex)
            add((v,), diagram_formula(world, (v,), g.parameters))
            covered.append((v,))
    universe = _head_vertices(g, world)[:pair_vertex_count]
    for length in range(2, tuple_bound + 1):
        for tup in itertools.product(universe, repeat=length):
            add(tup, diagram_formula(world, tup, g.parameters))
            covered.append(tup)
    return ScottFamily(g.parameters, tuple(entries), world, tuple(covered))


def check_condition1(
    f: ScottFamily, g: SymbolicCodingGraph, tuple_bound: int
) -> list[tuple[Vertex, ...]]:
    """Uncovered tuples in the family's declared range (empty list = pass)."""
    params = [f.world.index_of(p) for p in f.parameters]
    by_source = {e.source: e for e in f.entries}
    violations = []
    for tup in f.covered_tuples():
        if len(tup) > tuple_bound:
            continue
        idx = tuple(f.world.index_of(v) for v in tup)
        # own entry first: it succeeds immediately on intact families, so the
        # expensive full scan only runs for genuinely uncovered tuples
        own = by_source.get(tup)
        candidates = ([own] if own else []) + [
            e for e in f.entries_of_arity(len(tup)) if e is not own
        ]
        if not any(evaluate(e.formula, f.world, params, idx) for e in candidates):
            violations.append(tup)
    return violations


def check_condition2(
    f: ScottFamily, g: SymbolicCodingGraph, tuple_bound: int
) -> list[tuple[ExistentialFormula, tuple[Vertex, ...], tuple[Vertex, ...]]]:
    """Entry satisfiers that fail pairwise orbit equivalence (empty = pass)."""
    params = [f.world.index_of(p) for p in f.parameters]
    violations = []
    for e in f.entries:
        if e.arity > tuple_bound or e.arity == 0:
            continue
        sats = find_satisfying_tuples(e.formula, f.world, params)
        if not sats:
            continue
        pivot = tuple(f.world.vertices[i] for i in sats[0])
        for s in sats[1:]:
            other = tuple(f.world.vertices[i] for i in s)
            if not orbit_equivalent(g, OrbitQuery(pivot, other)):  # type: ignore[arg-type]
                violations.append((e.formula, pivot, other))
    return violations


def verify_isomorphism(m: dict[int, int], a: FiniteGraph, b: FiniteGraph) -> bool:
    if len(m) != len(a) or len(a) != len(b):
        return False
    if sorted(m) != list(range(len(a))) or sorted(m.values()) != list(range(len(b))):
        return False
    for i, j in itertools.combinations(range(len(a)), 2):
        if a.has_edge(i, j) != b.has_edge(m[i], m[j]):
            return False
    return True


def _prefix(g: FiniteGraph, n: int) -> FiniteGraph:
    return FiniteGraph(g.vertices[:n], [(i, j) for i, j in g.edges if i < n and j < n])


def _witnesses(
    phi: ExistentialFormula, g: FiniteGraph, params: Sequence[int]
) -> list[int]:
    return sorted(t[0] for t in find_satisfying_tuples(phi, g, params))


def back_and_forth(
    a: FiniteGraph,
    b: FiniteGraph,
    f: ScottFamily,
    param_image: Sequence[int],
    steps: int | None = None,
) -> dict[int, int]:
    """Alternating least-element extension of params -> param_image.

    Each step takes the least unmatched element on the active side, asks the
    family's extension rule for that element's formula with the currently
    matched tuple pinned as parameters, and maps it to the least witness of
    that formula on the opposite side.  A witness of a whole-graph diagram
    formula is always a safe choice (its satisfiability is equivalent to
    extendability to a full isomorphism), so no backtracking is needed.  With
    enough steps on isomorphic inputs the result is a total isomorphism;
    fewer steps give the partial map built so far.
    """
    k = len(f.parameters)
    if len(param_image) != k:
        raise ArityGapError("param_image length differs from parameter count")
    if len(a) != len(b):
        # unequal sizes: run on the common vertex count (index prefixes) and
        # report the partial map that far
        n = min(len(a), len(b))
        a, b = _prefix(a, n), _prefix(b, n)
    mapping = {a.index_of(p): param_image[i] for i, p in enumerate(f.parameters)}
    limit = min(len(a), len(b)) - len(mapping)
    if steps is None:
        steps = limit
    steps = min(steps, limit)
    inverse = {j: i for i, j in mapping.items()}
    for n in range(steps):
        matched_a = list(mapping)
        matched_b = [mapping[i] for i in matched_a]
        if n % 2 == 0:
            # forward: least unmatched element of a, witness sought in b
            src = min(i for i in range(len(a)) if i not in mapping)
            phi = f.extension(a, (a.vertices[src],), [a.vertices[i] for i in matched_a])
            wit = [w for w in _witnesses(phi, b, matched_b) if w not in inverse]
            if not wit:
                raise NoExtensionError(f"no image for element {src} at step {n}")
            mapping[src] = wit[0]
            inverse[wit[0]] = src
        else:
            # back: least unmatched element of b, witness sought in a
            dst = min(j for j in range(len(b)) if j not in inverse)
            phi = f.extension(b, (b.vertices[dst],), [b.vertices[j] for j in matched_b])
            wit = [w for w in _witnesses(phi, a, matched_a) if w not in mapping]
            if not wit:
                raise NoExtensionError(f"no preimage for element {dst} at step {n}")
            mapping[wit[0]] = dst
            inverse[dst] = wit[0]
    return mapping


def family_for_finite_graph(g: FiniteGraph, params: Sequence[Vertex | str]) -> ScottFamily:
    """A diagram-formula family over an arbitrary finite graph (checker fuel
    and back-and-forth driver for stage graphs)."""
    entries = []
    seen: set[ExistentialFormula] = set()
    for v in g.vertices:
        phi = diagram_formula(g, (v,), params)
        if phi not in seen:
            seen.add(phi)
            entries.append(FamilyEntry(1, phi, (v,) if isinstance(v, Vertex) else ()))
    return ScottFamily(
        tuple(p for p in params),  # type: ignore[arg-type]
        tuple(entries),
        g,
    )


def unique_isomorphism_bruteforce(a: FiniteGraph, b: FiniteGraph) -> dict[int, int] | None:
    """The sole isomorphism a -> b if exactly one exists (rigid cross-check)."""
    from .structures import enumerate_isomorphisms

    found = None
    for iso in enumerate_isomorphisms(a, b):
        if found is not None:
            return None
        found = iso
    return found


def all_tuples_over(vertices: Sequence[Vertex], max_len: int) -> Iterator[tuple[Vertex, ...]]:
    for length in range(1, max_len + 1):
        yield from itertools.product(vertices, repeat=length)
