"""Existential formulas over graphs: AST, evaluation, enumeration, searches.

The fragment is existentially quantified conjunctions of Edge / Eq / Neq
literals whose terms are free variables z_i, bound variables y_j, or
parameters a_i.  Satisfaction is witnessed by a homomorphism-style assignment
found by backtracking; a no-pruning brute-force evaluator serves as oracle.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from .approx import OMEGA
from .structures import (
    FiniteGraph,
    OrbitQuery,
    StageGraph,
    SymbolicCodingGraph,
    Vertex,
    orbit_equivalent,
    truncate,
)

# term encoding: ("z", i) free, ("a", i) parameter, ("y", j) bound; 1-based
Term = tuple[str, int]

_SORT_RANK = {"z": 0, "a": 1, "y": 2}
KINDS = ("eq", "edge", "neq")
_KIND_RANK = {k: i for i, k in enumerate(KINDS)}

Literal = tuple[str, Term, Term]


class ArityError(ValueError):
    pass


class ParameterMissingError(KeyError):
    """A formula parameter has no value in the given structure/stage."""


class SearchSpaceError(ValueError):
    """Brute-force search space exceeds the configured bound."""


def _term_key(t: Term) -> tuple[int, int]:
    return (_SORT_RANK[t[0]], t[1])


def _norm_literal(kind: str, t1: Term, t2: Term) -> Literal:
    if kind not in _KIND_RANK:
        raise ValueError(f"unknown literal kind {kind!r}")
    if t1 == t2:
        raise ValueError(f"degenerate literal ({kind} {t1} {t1})")
    if _term_key(t2) < _term_key(t1):
        t1, t2 = t2, t1
    return (kind, t1, t2)


def _literal_key(lit: Literal) -> tuple:
    return (_KIND_RANK[lit[0]], _term_key(lit[1]), _term_key(lit[2]))


@dataclass(frozen=True)
class ExistentialFormula:
    """exists y_1..y_q (conjunction of literals), free variables z_1..z_n."""

    free_arity: int
    bound_count: int
    literals: tuple[Literal, ...]

    def __post_init__(self) -> None:
        norm = sorted(
            {_norm_literal(k, t1, t2) for k, t1, t2 in self.literals},
            key=_literal_key,
        )
        object.__setattr__(self, "literals", tuple(norm))
        for _, t1, t2 in self.literals:
            for kind, i in (t1, t2):
                if i < 1:
                    raise ValueError("term indices are 1-based")
                if kind == "z" and i > self.free_arity:
                    raise ValueError(f"free variable z{i} exceeds arity")
                if kind == "y" and i > self.bound_count:
                    raise ValueError(f"bound variable y{i} exceeds count")

    @property
    def size(self) -> int:
        return self.bound_count + len(self.literals)

    @property
    def max_param(self) -> int:
        return max((i for _, t1, t2 in self.literals for k, i in (t1, t2) if k == "a"), default=0)

    def __repr__(self) -> str:
        return to_sexpr(self)


def make_formula(n: int, q: int, literals: Sequence[tuple[str, Term, Term]]) -> ExistentialFormula:
    return ExistentialFormula(n, q, tuple(literals))


# --- evaluation ---------------------------------------------------------


def _solutions(
    phi: ExistentialFormula,
    g: FiniteGraph,
    params: Sequence[int],
    fixed_free: Sequence[int] | None,
    free_domain: Sequence[int] | None = None,
) -> Iterator[tuple[int, ...]]:
    """Yield satisfying values of the free variables (deduplicated by caller).

    With fixed_free given, the free tuple is pinned and at most one (empty
    marker) solution matters.  Variables are ordered so that ones linked by an
    edge literal to something already grounded come first, letting adjacency
    lists drive their domains.
    """
    if phi.max_param > len(params):
        raise ArityError(f"formula needs {phi.max_param} parameters, got {len(params)}")
    if fixed_free is not None and len(fixed_free) != phi.free_arity:
        raise ArityError(f"tuple length {len(fixed_free)} != arity {phi.free_arity}")

    assignment: dict[Term, int] = {("a", i + 1): p for i, p in enumerate(params)}
    variables: list[Term] = []
    if fixed_free is not None:
        for i, v in enumerate(fixed_free):
            assignment[("z", i + 1)] = v
    else:
        variables.extend(("z", i + 1) for i in range(phi.free_arity))
    variables.extend(("y", j + 1) for j in range(phi.bound_count))

    # literals indexed by the variables they mention
    by_var: dict[Term, list[Literal]] = {v: [] for v in variables}
    for lit in phi.literals:
        for t in (lit[1], lit[2]):
            if t in by_var:
                by_var[t].append(lit)

    # connectivity-first static order: BFS from grounded terms along edge literals
    order: list[Term] = []
    placed = set(assignment)
    pending = list(variables)
    while pending:
        pick = None
        for v in pending:
            if any(
                lit[0] == "edge" and (lit[1] in placed or lit[2] in placed)
                for lit in by_var[v]
            ):
                pick = v
                break
        if pick is None:
            pick = pending[0]
        pending.remove(pick)
        placed.add(pick)
        order.append(pick)

    all_vertices = range(len(g))

    def check(v: Term, val: int) -> bool:
        for kind, t1, t2 in by_var[v]:
            other = t2 if t1 == v else t1
            if other == v:
                continue
            if other not in assignment:
                continue
            o = assignment[other]
            if kind == "eq" and val != o:
                return False
            if kind == "neq" and val == o:
                return False
            if kind == "edge" and o not in g.adjacency[val]:
                return False
        return True

    def ground_ok() -> bool:
        for kind, t1, t2 in phi.literals:
            if t1 in assignment and t2 in assignment:
                a, b = assignment[t1], assignment[t2]
                if kind == "eq" and a != b:
                    return False
                if kind == "neq" and a == b:
                    return False
                if kind == "edge" and b not in g.adjacency[a]:
                    return False
        return True

    if not ground_ok():
        return

    def domain(v: Term) -> Sequence[int]:
        dom: Sequence[int] | None = None
        for kind, t1, t2 in by_var[v]:
            other = t2 if t1 == v else t1
            if other in assignment:
                if kind == "edge":
                    adj = g.adjacency[assignment[other]]
                    dom = adj if dom is None else [x for x in dom if x in adj]
                elif kind == "eq":
                    pinned = assignment[other]
                    dom = [pinned] if (dom is None or pinned in dom) else []
        if dom is None:
            if v[0] == "z" and free_domain is not None:
                return free_domain
            return all_vertices
        if v[0] == "z" and free_domain is not None:
            allowed = set(free_domain)
            return [x for x in dom if x in allowed]
        return list(dom)

    def rec(k: int) -> Iterator[tuple[int, ...]]:
        if k == len(order):
            yield tuple(assignment[("z", i + 1)] for i in range(phi.free_arity))
            return
        v = order[k]
        for val in domain(v):
            if check(v, val):
                assignment[v] = val
                yield from rec(k + 1)
                del assignment[v]

    yield from rec(0)


def evaluate(
    phi: ExistentialFormula,
    g: FiniteGraph,
    params: Sequence[int],
    tup: Sequence[int],
) -> bool:
    return next(_solutions(phi, g, params, tup), None) is not None


def evaluate_bruteforce(
    phi: ExistentialFormula,
    g: FiniteGraph,
    params: Sequence[int],
    tup: Sequence[int],
    space_bound: int = 2_000_000,
) -> bool:
    """Oracle: enumerate every bound assignment, no pruning at all."""
    if phi.max_param > len(params):
        raise ArityError(f"formula needs {phi.max_param} parameters, got {len(params)}")
    if len(tup) != phi.free_arity:
        raise ArityError(f"tuple length {len(tup)} != arity {phi.free_arity}")
    n = len(g)
    if n**phi.bound_count > space_bound:
        raise SearchSpaceError(f"{n}^{phi.bound_count} exceeds {space_bound}")

    def value(t: Term, ys: tuple[int, ...]) -> int:
        kind, i = t
        if kind == "z":
            return tup[i - 1]
        if kind == "a":
            return params[i - 1]
        return ys[i - 1]

    for ys in itertools.product(range(n), repeat=phi.bound_count):
        ok = True
        for kind, t1, t2 in phi.literals:
            a, b = value(t1, ys), value(t2, ys)
            if kind == "eq":
                ok = a == b
            elif kind == "neq":
                ok = a != b
            else:
                ok = g.has_edge(a, b) if a != b else False
            if not ok:
                break
        if ok:
            return True
    return False


def find_satisfying_tuples(
    phi: ExistentialFormula,
    g: FiniteGraph,
    params: Sequence[int],
    free_domain: Sequence[int] | None = None,
    limit: int | None = None,
) -> list[tuple[int, ...]]:
    """All distinct free-variable tuples satisfying phi (optionally capped)."""
    seen: list[tuple[int, ...]] = []
    seen_set = set()
    for sol in _solutions(phi, g, params, None, free_domain=free_domain):
        if sol not in seen_set:
            seen_set.add(sol)
            seen.append(sol)
            if limit is not None and len(seen) >= limit:
                break
    return seen


def rejected_by(
    phi: ExistentialFormula,
    stage: StageGraph,
    params: Sequence[Vertex | str],
) -> bool:
    """Two distinct tuples among the first `stage` elements both satisfy phi."""
    g = stage.graph
    idx_params = []
    for p in params:
        if not g.has_vertex(p):
            raise ParameterMissingError(f"parameter {p} not present at stage {stage.stage}")
        idx_params.append(g.index_of(p))
    horizon = min(stage.stage, len(g))
    sols = find_satisfying_tuples(phi, g, idx_params, free_domain=range(horizon), limit=2)
    return len(sols) >= 2


# --- canonical enumeration ----------------------------------------------


def _literal_universe(n: int, q: int, n_params: int) -> list[Literal]:
    terms: list[Term] = (
        [("z", i + 1) for i in range(n)]
        + [("a", i + 1) for i in range(n_params)]
        + [("y", j + 1) for j in range(q)]
    )
    universe = [
        (kind, t1, t2)
        for kind in KINDS
        for t1, t2 in itertools.combinations(sorted(terms, key=_term_key), 2)
    ]
    return sorted(universe, key=_literal_key)


def _block(n: int, size: int, n_params: int) -> Iterator[ExistentialFormula]:
    """All canonical formulas of given arity and exact size, in index order."""
    for q in range(size + 1):
        n_lits = size - q
        universe = _literal_universe(n, q, n_params)
        for combo in itertools.combinations(universe, n_lits):
            yield ExistentialFormula(n, q, combo)


def enumerate_formulas(n: int, budget: int, n_params: int = 1) -> list[ExistentialFormula]:
    """All arity-n formulas of size <= budget, size-lexicographically ordered."""
    out: list[ExistentialFormula] = []
    for size in range(budget + 1):
        out.extend(_block(n, size, n_params))
    return out


def _global_stream(n_params: int = 1) -> Iterator[ExistentialFormula]:
    """The single global enumeration behind formula codes.

    Formulas are graded by arity+size so every arity eventually appears;
    within a grade, blocks closer to the diagonal come first (higher arity
    breaking ties), which keeps the small codes on short useful formulas.
    """
    grade = 0
    while True:
        blocks = [(n, grade - n) for n in range(grade, -1, -1)]
        blocks.sort(key=lambda b: (abs(b[0] - b[1]), -b[0]))
        for n, size in blocks:
            yield from _block(n, size, n_params)
        grade += 1


class FormulaIndex:
    """Lazy bijection between naturals and the canonical formula stream."""

    def __init__(self, n_params: int = 1) -> None:
        self._stream = _global_stream(n_params)
        self._prefix: list[ExistentialFormula] = []
        self._codes: dict[ExistentialFormula, int] = {}

    def _extend(self) -> None:
        phi = next(self._stream)
        self._codes[phi] = len(self._prefix)
        self._prefix.append(phi)

    def formula_at(self, code: int) -> ExistentialFormula:
        while len(self._prefix) <= code:
            self._extend()
        return self._prefix[code]

    def formula_code(self, phi: ExistentialFormula) -> int:
        # only sensible for formulas with small codes; grows the prefix on demand
        while phi not in self._codes:
            self._extend()
        return self._codes[phi]


GLOBAL_INDEX = FormulaIndex()


# --- searches on the symbolic graph -------------------------------------


def stable_chain_cap(phi: ExistentialFormula) -> int:
    # witnesses touch at most bound_count + free_arity vertices; one spare
    return phi.bound_count + phi.free_arity + 1


def audit_truncation(
    g: SymbolicCodingGraph,
    budget: int,
    arity: int,
    tuples: Sequence[Sequence[Vertex]] = (),
) -> FiniteGraph:
    """A truncation large enough to settle size<=budget formulas on `tuples`.

    The cap must reach every tuple position, exceed every finite chain so
    truncated infinite chains stay distinguishable from finite ones by length,
    and leave room for any in-budget witness assignment.
    """
    max_y = max((v.y for t in tuples for v in t), default=0)
    finite = [r.vchain_len for r in g.records if r.vchain_len != OMEGA]
    max_finite = max((int(c) for c in finite), default=0)
    cap = max(budget + arity + 1 + max_y, max_finite + 1, 3)
    return truncate(g, cap)


def _resolve(graph: FiniteGraph, vs: Sequence[Vertex]) -> list[int]:
    return [graph.index_of(v) for v in vs]


def defining_formula_search(
    g: SymbolicCodingGraph,
    tup: Sequence[Vertex],
    mode: str,
    budget: int,
) -> ExistentialFormula | None:
    """First enumerated formula true of `tup` whose satisfiers all collapse.

    In rigid mode every satisfying tuple must equal `tup`; in orbit mode it
    must be automorphic to it over the fixed parameters.  Checking runs on a
    truncation wide enough that an in-budget formula cannot tell it from the
    full graph.  Returns None when the budget is exhausted.
    """
    if mode not in ("rigid", "orbit"):
        raise ValueError(f"unknown mode {mode!r}")
    for v in tup:
        if not g.has_vertex(v):
            raise KeyError(f"vertex {v} not in graph")
    n = len(tup)
    world = audit_truncation(g, budget, n, [tup, g.parameters])
    params = _resolve(world, g.parameters)
    target = tuple(_resolve(world, tup))
    for phi in enumerate_formulas(n, budget, n_params=len(params)):
        if not evaluate(phi, world, params, target):
            continue
        sats = find_satisfying_tuples(phi, world, params)
        ok = True
        for s in sats:
            if mode == "rigid":
                if s != target:
                    ok = False
                    break
            else:
                other = tuple(world.vertices[i] for i in s)
                if not all(isinstance(v, Vertex) for v in other):
                    ok = False
                    break
                if not orbit_equivalent(g, OrbitQuery(tuple(tup), other)):  # type: ignore[arg-type]
                    ok = False
                    break
        if ok:
            return phi
    return None


def existential_type_equiv(
    g: SymbolicCodingGraph,
    t1: Sequence[Vertex],
    t2: Sequence[Vertex],
    budget: int,
) -> bool:
    """No size<=budget formula separates the two tuples."""
    if len(t1) != len(t2):
        raise ArityError("tuple length mismatch")
    n = len(t1)
    world = audit_truncation(g, budget, n, [t1, t2, g.parameters])
    params = _resolve(world, g.parameters)
    i1, i2 = _resolve(world, t1), _resolve(world, t2)
    for phi in enumerate_formulas(n, budget, n_params=len(params)):
        if evaluate(phi, world, params, i1) != evaluate(phi, world, params, i2):
            return False
    return True


# --- s-expression round-trip --------------------------------------------


def _term_sexpr(t: Term) -> str:
    kind, i = t
    if kind == "a":
        return f"(param {i})"
    return f"{kind}{i}"


def to_sexpr(phi: ExistentialFormula) -> str:
    ys = " ".join(f"y{j + 1}" for j in range(phi.bound_count))
    lits = " ".join(
        f"({kind} {_term_sexpr(t1)} {_term_sexpr(t2)})" for kind, t1, t2 in phi.literals
    )
    body = f"(and {lits})" if lits else "(and)"
    return f"(exists ({ys}) {body})"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _parse_tokens(tokens: list[str]) -> object:
    tok = tokens.pop(0)
    if tok == "(":
        out = []
        while tokens and tokens[0] != ")":
            out.append(_parse_tokens(tokens))
        if not tokens:
            raise ValueError("unbalanced parentheses")
        tokens.pop(0)
        return out
    if tok == ")":
        raise ValueError("unexpected )")
    return tok


def _parse_term(node: object) -> Term:
    if isinstance(node, list):
        if len(node) == 2 and node[0] == "param":
            return ("a", int(node[1]))  # type: ignore[arg-type]
        raise ValueError(f"bad term {node}")
    m = re.fullmatch(r"([zy])(\d+)", str(node))
    if not m:
        raise ValueError(f"bad term {node!r}")
    return (m.group(1), int(m.group(2)))


def from_sexpr(text: str, free_arity: int | None = None) -> ExistentialFormula:
    tokens = _TOKEN.findall(text)
    tree = _parse_tokens(tokens)
    if tokens:
        raise ValueError("trailing input")
    if not (isinstance(tree, list) and len(tree) == 3 and tree[0] == "exists"):
        raise ValueError("expected (exists (...) (and ...))")
    ys, body = tree[1], tree[2]
    if not isinstance(ys, list) or not isinstance(body, list) or not body or body[0] != "and":
        raise ValueError("expected (exists (...) (and ...))")
    q = len(ys)
    literals = []
    max_z = 0
    for item in body[1:]:
        if not (isinstance(item, list) and len(item) == 3):
            raise ValueError(f"bad literal {item}")
        kind = str(item[0])
        t1, t2 = _parse_term(item[1]), _parse_term(item[2])
        for t in (t1, t2):
            if t[0] == "z":
                max_z = max(max_z, t[1])
        literals.append((kind, t1, t2))
    n = max_z if free_arity is None else free_arity
    return ExistentialFormula(n, q, tuple(literals))
