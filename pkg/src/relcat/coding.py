"""The coding construction: stage graphs, the symbolic limit graph, scrambles.

A CodingInstance bundles a limit-set table with a stage enumeration of the
side set C.  From it we build the stage graphs (vertex lists driven by the
stage modulus and C_s) and the symbolic limit graph (chain lengths driven by
the limit modulus).
"""

from __future__ import annotations

import functools
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from .approx import (
    OMEGA,
    CeStageEnum,
    Sigma2Table,
    generate_table,
    modulus_limit,
    modulus_stage,
)
from .structures import (
    ChainRecord,
    FiniteGraph,
    StageGraph,
    SymbolicCodingGraph,
    U,
    Uprime,
    V,
    Vertex,
    Vprime,
    W,
    Wprime,
    coding_edges,
)


class InstanceFormatError(ValueError):
    """Raised for malformed instance documents, with a field diagnostic."""


@dataclass(frozen=True)
class CodingInstance:
    table: Sigma2Table
    c_enum: CeStageEnum

    def __post_init__(self) -> None:
        if self.c_enum.bound > self.table.z_bound:
            raise ValueError("c_enum bound exceeds table z_bound")
        if not self.c_enum.union <= set(range(self.table.x_bound)):
            raise ValueError("C must live below x_bound")

    @property
    def x_bound(self) -> int:
        return self.table.x_bound

    @property
    def stage_bound(self) -> int:
        return self.c_enum.bound

    @property
    def ground_d(self) -> frozenset[int]:
        return self.table.ground_d

    @property
    def c_set(self) -> frozenset[int]:
        return self.c_enum.union


def _stage_vertices(inst: CodingInstance, s: int) -> list[Vertex]:
    """Vertices present at stage s, unordered (canonical order applied later).

    At stage s: spine pairs and chain heads for x < min(s, x_bound);
    v-chain up to the stage modulus inclusive, w-chain strictly below it;
    the second v'-vertex and the w'-vertex appear once x enters C_s.
    """
    out: list[Vertex] = []
    cs = inst.c_enum.at(s)
    for x in range(min(s, inst.x_bound)):
        m = modulus_stage(inst.table, x, s)
        out.append(U(x))
        out.append(Uprime(x))
        out.extend(V(x, y) for y in range(m + 1))
        out.extend(W(x, y) for y in range(m))
        out.append(Vprime(x, 0))
        if x in cs:
            out.append(Vprime(x, 1))
            out.append(Wprime(x))
    return out


@functools.lru_cache(maxsize=None)
def _canonical_order(inst: CodingInstance, s: int) -> tuple[Vertex, ...]:
    # order of first appearance across stages, ties broken by (x, tag, y)
    seen: dict[Vertex, None] = {}
    for t in range(s + 1):
        for v in sorted(_stage_vertices(inst, t), key=Vertex.sort_key):
            seen.setdefault(v, None)
    return tuple(seen)


def build_stage(inst: CodingInstance, s: int) -> StageGraph:
    """The finite stage-s approximation of the coding graph.

    An edge is present iff both endpoints are; vertices never leave, so the
    stages form an increasing chain of induced subgraphs.
    """
    if not 0 <= s <= inst.stage_bound:
        raise ValueError(f"stage {s} out of range")
    vertices = _canonical_order(inst, s)
    return StageGraph(s, FiniteGraph(vertices, coding_edges(vertices)))


def build_symbolic(inst: CodingInstance) -> SymbolicCodingGraph:
    records = []
    for x in range(inst.x_bound):
        m = modulus_limit(inst.table, x)
        if m == OMEGA:
            records.append(ChainRecord(OMEGA, OMEGA, x in inst.c_set))
        else:
            records.append(ChainRecord(int(m) + 1, int(m), x in inst.c_set))
    return SymbolicCodingGraph(tuple(records))


def apply_permutation(g: FiniteGraph, perm: Sequence[int], rename: bool = False) -> FiniteGraph:
    """Move vertex i to position perm[i]; optionally hide names as n0, n1, ..."""
    n = len(g)
    if sorted(perm) != list(range(n)):
        raise ValueError("not a permutation")
    vertices: list[Vertex | str | None] = [None] * n
    for i, v in enumerate(g.vertices):
        vertices[perm[i]] = f"n{perm[i]}" if rename else v
    edges = [(perm[i], perm[j]) for i, j in g.edges]
    return FiniteGraph(vertices, edges)  # type: ignore[arg-type]


def scramble(g: FiniteGraph, seed: int) -> tuple[FiniteGraph, tuple[int, ...]]:
    """An isomorphic copy with hidden vertex names and a seed-derived order.

    Returns (copy, perm) where perm[i] is the copy-index of original vertex i;
    perm is for verification only and must not inform reconstruction.
    """
    rng = random.Random(seed)
    perm = list(range(len(g)))
    rng.shuffle(perm)
    return apply_permutation(g, perm, rename=True), tuple(perm)


# the canonical desk instance
INST1: dict[str, Any] = {
    "x_bound": 4,
    "z_bound": 16,
    "ground_D": [1, 3],
    "moduli": {"1": 2, "3": 0},
    "C": [1, 2],
    "C_enumeration": "default",
    "seed": 0,
}


def instance_from_dict(doc: Mapping[str, Any]) -> CodingInstance:
    def need(field: str) -> Any:
        if field not in doc:
            raise InstanceFormatError(f"missing field {field!r}")
        return doc[field]

    try:
        x_bound = int(need("x_bound"))
        z_bound = int(need("z_bound"))
        ground_d = {int(x) for x in need("ground_D")}
        moduli = {int(k): int(v) for k, v in need("moduli").items()}
        seed = int(doc.get("seed", 0))
    except (TypeError, ValueError, AttributeError) as e:
        raise InstanceFormatError(f"bad field value: {e}") from e
    try:
        table = generate_table(ground_d, moduli, x_bound, z_bound, seed)
    except ValueError as e:
        raise InstanceFormatError(str(e)) from e
    enum_spec = doc.get("C_enumeration", "default")
    bound = z_bound
    if enum_spec == "default":
        c = {int(x) for x in doc.get("C", [])}
        c_enum = CeStageEnum.default(c, bound)
    else:
        try:
            stages = [frozenset(int(x) for x in stage) for stage in enum_spec]
        except (TypeError, ValueError) as e:
            raise InstanceFormatError(f"bad C_enumeration: {e}") from e
        if len(stages) < bound + 1:
            stages.extend([stages[-1] if stages else frozenset()] * (bound + 1 - len(stages)))
        try:
            c_enum = CeStageEnum(bound, tuple(stages[: bound + 1]))
        except ValueError as e:
            raise InstanceFormatError(f"bad C_enumeration: {e}") from e
    try:
        return CodingInstance(table, c_enum)
    except ValueError as e:
        raise InstanceFormatError(str(e)) from e


def load_instance(path: str | Path) -> CodingInstance:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise InstanceFormatError("instance document must be an object")
    return instance_from_dict(doc)


def inst1() -> CodingInstance:
    return instance_from_dict(INST1)


def random_instance(
    seed: int,
    x_bound: int = 4,
    z_bound: int = 16,
    max_modulus: int | None = None,
) -> CodingInstance:
    """A seed-determined instance with valid moduli and a default C enumeration."""
    rng = random.Random(seed)
    if max_modulus is None:
        max_modulus = min(4, z_bound - 2)
    ground_d = {x for x in range(x_bound) if rng.random() < 0.5}
    moduli = {x: rng.randint(0, max_modulus) for x in ground_d}
    c = {x for x in range(x_bound) if rng.random() < 0.4}
    # at the spine's cut end a v- or w-chain of length 2 would mirror the bare
    # u'-branch, adding a truncation symmetry the limit graph lacks; keep the
    # last modulus away from {1, 2} unless that branch gains the C vertices
    last = x_bound - 1
    if last in ground_d and last not in c and moduli[last] in (1, 2):
        moduli[last] = 0
    table = generate_table(ground_d, moduli, x_bound, z_bound, seed=rng.randrange(2**30))
    return CodingInstance(table, CeStageEnum.default(c, z_bound))
