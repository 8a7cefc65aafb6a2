"""Seeded random instances shared by the test suite and ``starlift generate``."""
from __future__ import annotations

import random
from fractions import Fraction

from .dist import SampleSpace, SubDistribution
from .relation import FiniteRelation

KS = (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3))
DELTAS = (Fraction(0), Fraction(1, 8), Fraction(1, 2))


def random_space(rng: random.Random, size: int, offset: int = 0) -> SampleSpace:
    return SampleSpace(range(offset, offset + size))


def random_subdistribution(rng: random.Random, space: SampleSpace, *, max_den: int = 16,
                           proper: bool = False) -> SubDistribution:
    """Masses ``c_i / d`` with ``d <= max_den`` and ``sum c_i <= d``.

    The counts are a uniformly random weak composition (stars and bars),
    so zero masses and point masses both occur.
    """
    n = len(space)
    if n == 0:
        return SubDistribution(space, {})
    d = rng.randint(1, max_den)
    units = d if proper or rng.random() < 0.5 else rng.randint(0, d)
    cuts = sorted(rng.randint(0, units) for _ in range(n - 1))
    counts = [b - a for a, b in zip([0, *cuts], [*cuts, units])]
    return SubDistribution(space, {x: Fraction(c, d) for x, c in zip(space, counts)})


def random_relation(rng: random.Random, left: SampleSpace, right: SampleSpace,
                    density: float | None = None) -> FiniteRelation:
    p = rng.random() if density is None else density
    return FiniteRelation.from_predicate(left, right, lambda a, b: rng.random() < p)


def random_map(rng: random.Random, source: SampleSpace, target: SampleSpace) -> dict:
    elems = tuple(target)
    return {a: rng.choice(elems) for a in source}


def random_subset(rng: random.Random, space: SampleSpace) -> frozenset:
    return frozenset(a for a in space if rng.random() < 0.5)


def random_instance(rng: random.Random, *, max_left: int = 6, max_right: int = 6,
                    ks=KS, deltas=DELTAS, proper: bool = False):
    """``(mu1, mu2, relation, k, delta)`` for the synthesis/oracle agreement runs."""
    left = random_space(rng, rng.randint(1, max_left))
    right = random_space(rng, rng.randint(1, max_right), offset=100)
    mu1 = random_subdistribution(rng, left, proper=proper)
    mu2 = random_subdistribution(rng, right, proper=proper)
    rel = random_relation(rng, left, right)
    return mu1, mu2, rel, rng.choice(ks), rng.choice(deltas)


def random_kernel(rng: random.Random, source: SampleSpace, target: SampleSpace, *,
                  max_den: int = 16, proper: bool = True) -> dict:
    return {a: random_subdistribution(rng, target, max_den=max_den, proper=proper)
            for a in source}
