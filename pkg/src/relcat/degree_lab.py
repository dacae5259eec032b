"""Rejection-based enumeration and the decoding procedures.

The rejection set E is driven by a stage-enumerated operator table V of coded
4-tuples <x,y,u,v> and a stabilizing approximation d(x,s): a coded triple
<x,y,s> stays out of E_t exactly when every constraint that fires below t
(d(x,p)=y and <x,y,u,v> in V_p) carries some formula of the finite set coded
by u that is rejected by the stage-t graph.  The decoders recover the side
set C and the complement of the limit set D from a generated family by
scanning stages for a satisfied unary entry.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

from .approx import DeltaApprox, decode_set, encode_set, pair3, pair4, unpair3, unpair4
from .coding import CodingInstance, build_stage
from .formulas import (
    GLOBAL_INDEX,
    ParameterMissingError,
    evaluate,
    make_formula,
    rejected_by,
)
from .scott import ScottFamily
from .structures import Vertex, Vprime, V, W


class DishonestScenarioError(RuntimeError):
    """No (u, v, p) certificate exists for a triple with y = D(x)."""


class DecodeExhaustionError(RuntimeError):
    """The stage/entry search ended without a satisfied family formula."""


@dataclass(frozen=True)
class OperatorTable:
    """Monotone stage enumeration V_0 <= ... <= V_bound of coded 4-tuples."""

    bound: int
    stages: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        if len(self.stages) != self.bound + 1:
            raise ValueError("need bound+1 stage sets")
        for p in range(1, self.bound + 1):
            if not self.stages[p - 1] <= self.stages[p]:
                raise ValueError(f"stage {p} not monotone")
        for s in self.stages:
            for code in s:
                unpair4(code)  # must decode; raises only on non-naturals

    def at(self, p: int) -> frozenset[int]:
        return self.stages[min(p, self.bound)]

    @classmethod
    def empty(cls, bound: int) -> "OperatorTable":
        return cls(bound, tuple(frozenset() for _ in range(bound + 1)))


@dataclass(frozen=True)
class RejectionLedger:
    stages: tuple[frozenset[int], ...]  # stages[t] = E_t

    @property
    def union(self) -> frozenset[int]:
        return frozenset().union(*self.stages) if self.stages else frozenset()

    def member(self, code: int) -> bool:
        return code in self.union


def _delta_at(d: DeltaApprox, x: int, p: int) -> int:
    # the approximation is total; rows beyond the table approximate 0
    return d.at(x, p) if x < d.x_bound else 0


def _ground_membership(inst: CodingInstance, x: int) -> int:
    return 1 if x in inst.ground_d else 0


@functools.lru_cache(maxsize=None)
def _rejection_cached(code: int, inst: CodingInstance, t: int, params: tuple[Vertex, ...]) -> bool:
    phi = GLOBAL_INDEX.formula_at(code)
    try:
        return rejected_by(phi, build_stage(inst, t), params)
    except ParameterMissingError:
        return False  # stage too early to reject anything


def compute_E_t(
    v: OperatorTable,
    d: DeltaApprox,
    inst: CodingInstance,
    f: ScottFamily,
    t: int,
) -> frozenset[int]:
    """Coded triples < t surviving every active constraint at stage t."""
    if not 0 <= t <= inst.stage_bound:
        raise ValueError(f"stage {t} out of range")
    out = set()
    for code in range(t):
        x, y, _s = unpair3(code)
        ok = True
        for p in range(t):
            for vcode in v.at(p):
                x2, y2, u, v2 = unpair4(vcode)
                if (x2, y2) != (x, y) or u >= p or v2 >= p:
                    continue
                if _delta_at(d, x, p) != y:
                    continue
                # constraint fires: some formula of D_u must be rejected at t
                if not any(
                    _rejection_cached(c, inst, t, f.parameters) for c in decode_set(u)
                ):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.add(code)
    return frozenset(out)


def build_ledger(
    v: OperatorTable,
    d: DeltaApprox,
    inst: CodingInstance,
    f: ScottFamily,
    bound: int,
) -> RejectionLedger:
    return RejectionLedger(tuple(compute_E_t(v, d, inst, f, t) for t in range(bound + 1)))


def decide_E_with_D(
    v: OperatorTable,
    d: DeltaApprox,
    inst: CodingInstance,
    f: ScottFamily,
    triple: tuple[int, int, int],
) -> bool:
    """Membership in E using ground-truth D instead of the full ledger.

    Wrong membership guesses (y != D(x)) are in E outright.  Otherwise locate
    the least p whose table row certifies the guess with a formula set that
    the family actually contains; then membership only needs the ledger up to
    that p.
    """
    x, y, s = triple
    if y != _ground_membership(inst, x):
        return True
    for p in range(v.bound + 1):
        for vcode in v.at(p):
            x2, y2, u, v2 = unpair4(vcode)
            if (x2, y2) != (x, y) or u >= p or v2 >= p:
                continue
            if _delta_at(d, x, p) != y:
                continue
            if all(f.has_code(c) for c in decode_set(u)):
                code = pair3(x, y, s)
                return any(
                    code in compute_E_t(v, d, inst, f, t) for t in range(min(p, inst.stage_bound) + 1)
                )
    raise DishonestScenarioError(f"no certificate for {triple}")


def honest_scenario(
    inst: CodingInstance, f: ScottFamily
) -> tuple[OperatorTable, DeltaApprox]:
    """A table/approximation pair satisfying decide_E_with_D's precondition.

    For every x below the instance bound the table eventually holds one tuple
    <x, D(x), u, v> where u codes a family formula that is never rejected
    (the parameter pin, whose sole satisfier is the parameter itself) and v
    codes a formula outside the family.
    """
    pin = make_formula(1, 0, [("eq", ("z", 1), ("a", 1))])
    pin_code = GLOBAL_INDEX.formula_code(pin)
    if not f.has_code(pin_code):
        raise DishonestScenarioError("family lacks the parameter-pin formula")
    u = encode_set({pin_code})
    filler = 0
    while f.has_code(filler):
        filler += 1
    v_code = encode_set({filler})
    p0 = max(u, v_code) + 1
    bound = inst.stage_bound
    if p0 > bound:
        raise DishonestScenarioError(f"certificate stage {p0} exceeds bound {bound}")
    tuples = frozenset(
        pair4(x, _ground_membership(inst, x), u, v_code) for x in range(inst.x_bound)
    )
    stages = tuple(tuples if p >= p0 else frozenset() for p in range(bound + 1))
    d = DeltaApprox.constant(
        [_ground_membership(inst, x) for x in range(inst.x_bound)], bound + 1
    )
    return OperatorTable(bound, stages), d


def _family_x0(f: ScottFamily) -> int:
    xs = [p.x + 1 for p in f.parameters if p.tag not in ("u", "u'")]
    return max(xs, default=0)


def _unary_entries(f: ScottFamily):
    return [e for e in f.entries if e.arity == 1]


def _scan_stages(
    f: ScottFamily,
    inst: CodingInstance,
    targets: Sequence[Vertex],
) -> tuple[int, bool] | None:
    """First (stage, entry) where some unary entry holds at all targets;
    returns (stage, True).  None when the bound is exhausted."""
    for s in range(1, inst.stage_bound + 1):
        stage = build_stage(inst, s)
        g = stage.graph
        if not all(g.has_vertex(v) for v in targets):
            continue
        if not all(g.has_vertex(p) for p in f.parameters):
            continue
        params = [g.index_of(p) for p in f.parameters]
        idx = [g.index_of(v) for v in targets]
        for e in _unary_entries(f):
            # a diagram entry needs at least its own vertex count to embed
            if e.formula.bound_count + e.formula.free_arity + len(f.parameters) > len(g):
                continue
            if all(evaluate(e.formula, g, params, (i,)) for i in idx):
                return s, True
    return None


def decode_C(f: ScottFamily, inst: CodingInstance, x: int) -> bool:
    """Recover membership of x in C from the family, via the v'-chain head."""
    if x < _family_x0(f):
        raise ValueError(f"x={x} is below the family's safe index {_family_x0(f)}")
    hit = _scan_stages(f, inst, [Vprime(x, 0)])
    if hit is None:
        raise DecodeExhaustionError(f"no satisfied unary entry for v'({x},0)")
    s, _ = hit
    return x in inst.c_enum.at(s)


def decode_D_complement(f: ScottFamily, inst: CodingInstance, x: int) -> bool:
    """True iff some unary entry holds at both chain heads of x at some stage.

    A positive answer certifies x outside the limit set; a negative answer is
    only exhaustion of the stage bound (the semantically negative case).
    """
    if x < _family_x0(f):
        raise ValueError(f"x={x} is below the family's safe index {_family_x0(f)}")
    return _scan_stages(f, inst, [V(x, 0), W(x, 0)]) is not None


def decode_report(f: ScottFamily, inst: CodingInstance) -> list[dict]:
    rows = []
    for x in range(_family_x0(f), inst.x_bound):
        rows.append(
            {
                "x": x,
                "c_decoded": decode_C(f, inst, x),
                "c_truth": x in inst.c_set,
                "d_comp_decoded": decode_D_complement(f, inst, x),
                "d_comp_truth": x not in inst.ground_d,
            }
        )
    return rows
