"""Finite binary relations stored as explicit pair sets."""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .dist import SampleSpace
from .errors import SpaceError


def _fn(f):
    return f.__getitem__ if isinstance(f, Mapping) else f


@dataclass(frozen=True)
class FiniteRelation:
    left_space: SampleSpace
    right_space: SampleSpace
    pairs: frozenset

    def __init__(self, left_space, right_space, pairs: Iterable[tuple] = ()):
        if not isinstance(left_space, SampleSpace):
            left_space = SampleSpace(left_space)
        if not isinstance(right_space, SampleSpace):
            right_space = SampleSpace(right_space)
        pairs = frozenset((a, b) for a, b in pairs)
        for a, b in pairs:
            if a not in left_space or b not in right_space:
                raise SpaceError(f"pair {(a, b)!r} is outside {left_space!r} x {right_space!r}")
        object.__setattr__(self, "left_space", left_space)
        object.__setattr__(self, "right_space", right_space)
        object.__setattr__(self, "pairs", pairs)

    def __contains__(self, pair):
        return pair in self.pairs

    def __iter__(self):
        return iter(self.ordered_pairs())

    def __len__(self):
        return len(self.pairs)

    def __repr__(self):
        return f"FiniteRelation({list(self.ordered_pairs())!r})"

    def ordered_pairs(self) -> tuple:
        li, ri = self.left_space.index, self.right_space.index
        return tuple(sorted(self.pairs, key=lambda p: (li(p[0]), ri(p[1]))))

    def successors(self, a) -> frozenset:
        return frozenset(b for x, b in self.pairs if x == a)

    def predecessors(self, b) -> frozenset:
        return frozenset(a for a, y in self.pairs if y == b)

    # -- constructors --------------------------------------------------------

    @classmethod
    def equality(cls, space: SampleSpace) -> "FiniteRelation":
        return cls(space, space, ((a, a) for a in space))

    @classmethod
    def full(cls, left_space, right_space) -> "FiniteRelation":
        return cls(left_space, right_space, ((a, b) for a in left_space for b in right_space))

    @classmethod
    def empty(cls, left_space, right_space) -> "FiniteRelation":
        return cls(left_space, right_space, ())

    @classmethod
    def from_predicate(cls, left_space, right_space, pred) -> "FiniteRelation":
        return cls(left_space, right_space,
                   ((a, b) for a in left_space for b in right_space if pred(a, b)))


def image(rel: FiniteRelation, atoms: Iterable) -> frozenset:
    """Everything on the right related to some atom of ``atoms``."""
    atoms = rel.left_space.check(atoms)
    return frozenset(b for a, b in rel.pairs if a in atoms)


def inverse(rel: FiniteRelation) -> FiniteRelation:
    return FiniteRelation(rel.right_space, rel.left_space, ((b, a) for a, b in rel.pairs))


def compose(second: FiniteRelation, first: FiniteRelation) -> FiniteRelation:
    """``second ∘ first``: pairs (a, c) with a first b and b second c."""
    if first.right_space != second.left_space:
        raise SpaceError("cannot compose: middle spaces differ")
    succ: dict = {}
    for b, c in second.pairs:
        succ.setdefault(b, []).append(c)
    return FiniteRelation(first.left_space, second.right_space,
                          ((a, c) for a, b in first.pairs for c in succ.get(b, ())))


def pullback(f1, f2, rel: FiniteRelation, left_space: SampleSpace,
             right_space: SampleSpace) -> FiniteRelation:
    """Pairs (a1, a2) of the source spaces with ``(f1(a1), f2(a2))`` in ``rel``."""
    g1, g2 = _fn(f1), _fn(f2)
    img1 = {a: g1(a) for a in left_space}
    img2 = {a: g2(a) for a in right_space}
    for a, b in img1.items():
        if b not in rel.left_space:
            raise SpaceError(f"map sends {a!r} to {b!r}, outside {rel.left_space!r}")
    for a, b in img2.items():
        if b not in rel.right_space:
            raise SpaceError(f"map sends {a!r} to {b!r}, outside {rel.right_space!r}")
    return FiniteRelation(left_space, right_space,
                          ((x, y) for x in left_space for y in right_space
                           if (img1[x], img2[y]) in rel.pairs))


def implies_left(theta: Iterable, rel: FiniteRelation) -> FiniteRelation:
    """``{(a, b) | a in theta => (a, b) in rel}``."""
    theta = rel.left_space.check(theta)
    extra = ((a, b) for a in rel.left_space if a not in theta for b in rel.right_space)
    return FiniteRelation(rel.left_space, rel.right_space, rel.pairs | frozenset(extra))


def implies_right(theta: Iterable, rel: FiniteRelation) -> FiniteRelation:
    """``{(a, b) | b in theta => (a, b) in rel}``."""
    theta = rel.right_space.check(theta)
    extra = ((a, b) for a in rel.left_space for b in rel.right_space if b not in theta)
    return FiniteRelation(rel.left_space, rel.right_space, rel.pairs | frozenset(extra))


def conjoin_left(theta: Iterable, rel: FiniteRelation) -> FiniteRelation:
    theta = rel.left_space.check(theta)
    return FiniteRelation(rel.left_space, rel.right_space,
                          (p for p in rel.pairs if p[0] in theta))


def conjoin_right(theta: Iterable, rel: FiniteRelation) -> FiniteRelation:
    theta = rel.right_space.check(theta)
    return FiniteRelation(rel.left_space, rel.right_space,
                          (p for p in rel.pairs if p[1] in theta))


def iff_relation(left_space, right_space, p1: Iterable, p2: Iterable) -> FiniteRelation:
    """``a1 R a2  <=>  (a1 in p1 <=> a2 in p2)``, the subset-coupling relation."""
    if not isinstance(left_space, SampleSpace):
        left_space = SampleSpace(left_space)
    if not isinstance(right_space, SampleSpace):
        right_space = SampleSpace(right_space)
    p1, p2 = left_space.check(p1), right_space.check(p2)
    return FiniteRelation.from_predicate(left_space, right_space,
                                         lambda a, b: (a in p1) == (b in p2))


def symmetric_closure(rel: FiniteRelation) -> FiniteRelation:
    if rel.left_space != rel.right_space:
        raise SpaceError("symmetric closure needs a relation on a single space")
    return FiniteRelation(rel.left_space, rel.right_space,
                          rel.pairs | frozenset((b, a) for a, b in rel.pairs))
