"""Finite presentations of limit sets, stage enumerations, and coding conventions.

A limit set D is presented by a total predicate R(x,z): membership means the
row x is eventually all-true, and the modulus m(x) is the least stage past
which it stays true.  At desk scale R is a finite truth table and membership
is declared ground truth; the table is generated to be consistent with the
declaration, so every limit claim made here is exact over the table.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping

OMEGA = math.inf  # stand-in for "no finite modulus"


@dataclass(frozen=True)
class Sigma2Table:
    """Truth table for R(x,z), x < x_bound, z < z_bound, with declared limits."""

    x_bound: int
    z_bound: int
    bits: tuple[tuple[bool, ...], ...]  # bits[x][z] = R(x, z)
    ground_d: frozenset[int]
    ground_moduli: tuple[tuple[int, int], ...]  # sorted (x, m) pairs

    def __post_init__(self) -> None:
        if len(self.bits) != self.x_bound:
            raise ValueError("bits row count does not match x_bound")
        moduli = dict(self.ground_moduli)
        if set(moduli) != set(self.ground_d):
            raise ValueError("moduli must be defined exactly on ground_d")
        for x in range(self.x_bound):
            row = self.bits[x]
            if len(row) != self.z_bound:
                raise ValueError("bits column count does not match z_bound")
            if x in self.ground_d:
                m = moduli[x]
                if not all(row[z] for z in range(m, self.z_bound)):
                    raise ValueError(f"row {x}: tail below declared modulus")
                if m > 0 and row[m - 1]:
                    raise ValueError(f"row {x}: modulus not exact")
            else:
                # last column must fail, so no true tail survives
                if self.z_bound > 0 and row[self.z_bound - 1]:
                    raise ValueError(f"row {x}: non-member row ends true")

    def modulus_of(self, x: int) -> int | float:
        return dict(self.ground_moduli).get(x, OMEGA)


def generate_table(
    ground_d: Iterable[int],
    moduli: Mapping[int, int],
    x_bound: int,
    z_bound: int,
    seed: int = 0,
) -> Sigma2Table:
    """Build a table consistent with the declared membership and moduli.

    Member rows are true from the modulus on, false just before it (exactness),
    and pseudo-random below.  Non-member rows are all false: any finite pattern
    is a faithful truncation of a row with no true tail, and all-false keeps the
    stage modulus maximal (= s), matching the divergent limit.
    """
    dset = frozenset(ground_d)
    if set(moduli) != set(dset):
        raise ValueError("moduli must be defined exactly on ground_d")
    for x in dset:
        if x >= x_bound:
            raise ValueError(f"ground_d element {x} >= x_bound")
        if moduli[x] >= z_bound - 1:
            raise ValueError(f"modulus for {x} out of range")
    rng = random.Random(seed)
    rows = []
    for x in range(x_bound):
        if x in dset:
            m = moduli[x]
            row = [rng.random() < 0.5 for _ in range(max(m - 1, 0))]
            if m > 0:
                row.append(False)  # exactness at m-1
            row.extend(True for _ in range(z_bound - m))
        else:
            row = [False] * z_bound
        rows.append(tuple(row))
    return Sigma2Table(
        x_bound=x_bound,
        z_bound=z_bound,
        bits=tuple(rows),
        ground_d=dset,
        ground_moduli=tuple(sorted((x, moduli[x]) for x in dset)),
    )


def q_pred(t: Sigma2Table, x: int, y: int, s: int) -> bool:
    """True iff R(x,z) holds for every z with y <= z < s."""
    if not 0 <= x < t.x_bound:
        raise ValueError(f"x={x} out of range")
    if not 0 <= s <= t.z_bound:
        raise ValueError(f"s={s} out of range")
    return all(t.bits[x][z] for z in range(y, s))


def modulus_stage(t: Sigma2Table, x: int, s: int) -> int:
    """Least y < s such that q_pred(x, y, s); s if none."""
    if not 0 <= x < t.x_bound:
        raise ValueError(f"x={x} out of range")
    if not 0 <= s <= t.z_bound:
        raise ValueError(f"s={s} out of range")
    # least qualifying y = s minus the trailing all-true run of row x below s
    row = t.bits[x]
    y = s
    while y > 0 and row[y - 1]:
        y -= 1
    return y if y < s else s


def modulus_limit(t: Sigma2Table, x: int) -> int | float:
    """Limit modulus over the whole table: finite on members, OMEGA off them."""
    m = modulus_stage(t, x, t.z_bound)
    return OMEGA if m == t.z_bound else m


def encode_set(s: Iterable[int]) -> int:
    """Canonical finite-set code: bit i set iff i in the set."""
    n = 0
    for i in s:
        n |= 1 << i
    return n


def decode_set(n: int) -> frozenset[int]:
    out = set()
    i = 0
    while n:
        if n & 1:
            out.add(i)
        n >>= 1
        i += 1
    return frozenset(out)


def pair(x: int, y: int) -> int:
    """Cantor pairing."""
    return (x + y) * (x + y + 1) // 2 + y


def unpair(n: int) -> tuple[int, int]:
    w = int((math.isqrt(8 * n + 1) - 1) // 2)
    y = n - w * (w + 1) // 2
    return w - y, y


def pair3(x: int, y: int, s: int) -> int:
    return pair(pair(x, y), s)


def unpair3(n: int) -> tuple[int, int, int]:
    xy, s = unpair(n)
    x, y = unpair(xy)
    return x, y, s


def pair4(x: int, y: int, u: int, v: int) -> int:
    return pair(pair3(x, y, u), v)


def unpair4(n: int) -> tuple[int, int, int, int]:
    xyu, v = unpair(n)
    x, y, u = unpair3(xyu)
    return x, y, u, v


@dataclass(frozen=True)
class CeStageEnum:
    """Monotone stage enumeration C_0 <= C_1 <= ... <= C_bound, C_s in {0..s-1}."""

    bound: int
    stages: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        if len(self.stages) != self.bound + 1:
            raise ValueError("need bound+1 stage sets")
        for s, cs in enumerate(self.stages):
            if not cs <= set(range(s)):
                raise ValueError(f"C_{s} not within {{0..{s - 1}}}")
            if s > 0 and not self.stages[s - 1] <= cs:
                raise ValueError(f"stage {s} not monotone")

    @property
    def union(self) -> frozenset[int]:
        return self.stages[-1]

    def at(self, s: int) -> frozenset[int]:
        return self.stages[min(s, self.bound)]

    @classmethod
    def default(cls, c: Iterable[int], bound: int) -> "CeStageEnum":
        """The default rule C_s = C intersect {0..s-1}."""
        cset = frozenset(c)
        return cls(bound, tuple(cset & frozenset(range(s)) for s in range(bound + 1)))


@dataclass(frozen=True)
class DeltaApprox:
    """A stabilizing approximation d(x,s) with its declared stabilization points."""

    values: tuple[tuple[int, ...], ...]  # values[x][s]
    stabilization: tuple[tuple[int, int], ...]  # sorted (x, stage) pairs

    def __post_init__(self) -> None:
        stab = dict(self.stabilization)
        for x, row in enumerate(self.values):
            p = stab.get(x, 0)
            if any(row[s] != row[p] for s in range(p, len(row))):
                raise ValueError(f"row {x} not stable past {p}")

    @property
    def x_bound(self) -> int:
        return len(self.values)

    @property
    def s_bound(self) -> int:
        return len(self.values[0]) if self.values else 0

    def at(self, x: int, s: int) -> int:
        return self.values[x][min(s, self.s_bound - 1)]

    def limit(self, x: int) -> int:
        return self.values[x][-1]

    @classmethod
    def constant(cls, limits: Iterable[int], s_bound: int) -> "DeltaApprox":
        vals = tuple(tuple([v] * s_bound) for v in limits)
        return cls(vals, tuple((x, 0) for x in range(len(vals))))


@dataclass(frozen=True)
class FiniteSetCode:
    index: int
    elements: frozenset[int] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", decode_set(self.index))


@dataclass(frozen=True)
class TripleCode:
    x: int
    y: int
    s: int

    @property
    def code(self) -> int:
        return pair3(self.x, self.y, self.s)

    @classmethod
    def from_code(cls, n: int) -> "TripleCode":
        return cls(*unpair3(n))
