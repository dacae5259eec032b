from __future__ import annotations

import random

import pytest

from relcat.coding import inst1
from relcat.formulas import ExistentialFormula
from relcat.structures import FiniteGraph


@pytest.fixture(scope="session")
def canonical_instance():
    return inst1()


def random_graph(rng: random.Random, n: int, p: float = 0.35) -> FiniteGraph:
    edges = [
        (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p
    ]
    return FiniteGraph([f"g{i}" for i in range(n)], edges)


def random_formula(
    rng: random.Random,
    arity: int,
    max_bound: int = 3,
    max_literals: int = 4,
    n_params: int = 1,
) -> ExistentialFormula:
    q = rng.randint(0, max_bound)
    terms = (
        [("z", i + 1) for i in range(arity)]
        + [("a", i + 1) for i in range(n_params)]
        + [("y", j + 1) for j in range(q)]
    )
    literals = []
    if len(terms) >= 2:
        for _ in range(rng.randint(0, max_literals)):
            t1, t2 = rng.sample(terms, 2)
            literals.append((rng.choice(["eq", "edge", "neq"]), t1, t2))
    return ExistentialFormula(arity, q, tuple(literals))
