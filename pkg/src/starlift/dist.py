"""Finite sub-distributions with exact rational masses.

Everything here is immutable.  A :class:`SampleSpace` fixes the atoms and
their iteration order, a :class:`SubDistribution` assigns each atom a
:class:`~fractions.Fraction`, and a :class:`JointSubDistribution` does the
same for pairs drawn from two spaces.  Either side of a joint space may be
extended with the distinguished :data:`STAR` atom.
"""
from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Any, Hashable, Union

from .errors import DistributionError, SpaceError

Atom = Hashable
Kernel = Union[Callable[[Any], "SubDistribution"], Mapping[Any, "SubDistribution"]]

ZERO = Fraction(0)
ONE = Fraction(1)


class _Star:
    """The extra atom adjoined by star extension.  Equal only to itself."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "STAR"

    def __str__(self):
        return "⋆"

    def __reduce__(self):
        return (_Star, ())


STAR = _Star()


def as_fraction(value) -> Fraction:
    """Coerce an exact rational (int, Fraction, "p/q" string) to Fraction.

    Floats are refused: the core never stores inexact masses.
    """
    if isinstance(value, bool):
        raise DistributionError(f"expected a rational, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise DistributionError(f"not a rational literal: {value!r}") from exc
    raise DistributionError(f"expected an exact rational, got {type(value).__name__} {value!r}")


@dataclass(frozen=True)
class SampleSpace:
    """Ordered, duplicate-free finite set of atoms."""

    elements: tuple

    def __init__(self, elements: Iterable[Atom] = ()):
        elems = tuple(elements)
        if len(set(elems)) != len(elems):
            seen, dups = set(), []
            for e in elems:
                if e in seen:
                    dups.append(e)
                seen.add(e)
            raise SpaceError(f"duplicate atoms in sample space: {dups!r}")
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(elems)})

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, atom):
        try:
            return atom in self._index
        except TypeError:
            return False

    def __repr__(self):
        return f"SampleSpace({list(self.elements)!r})"

    def index(self, atom) -> int:
        try:
            return self._index[atom]
        except (KeyError, TypeError):
            raise SpaceError(f"atom {atom!r} is not in {self!r}") from None

    @property
    def is_extended(self) -> bool:
        return STAR in self._index

    def extended(self) -> "SampleSpace":
        """The space with STAR appended."""
        if self.is_extended:
            raise SpaceError(f"{self!r} is already star-extended")
        return SampleSpace(self.elements + (STAR,))

    def base(self) -> "SampleSpace":
        """The space with STAR removed (identity on plain spaces)."""
        if not self.is_extended:
            return self
        return SampleSpace(e for e in self.elements if e is not STAR)

    def check(self, atoms: Iterable[Atom]) -> frozenset:
        """Return ``atoms`` as a frozenset, raising if any is foreign."""
        atoms = frozenset(atoms)
        for a in atoms:
            if a not in self:
                raise SpaceError(f"atom {a!r} is not in {self!r}")
        return atoms

    def ordered(self, atoms: Iterable[Atom]) -> tuple:
        """Sort a subset of the space into space order."""
        return tuple(sorted(self.check(atoms), key=self._index.__getitem__))

    def subsets(self):
        """All subsets in binary-counter order (index 0 is the low bit)."""
        n = len(self.elements)
        for mask in range(1 << n):
            yield frozenset(self.elements[i] for i in range(n) if mask >> i & 1)


def _freeze_masses(mass: Mapping, valid: Callable[[Any], bool], where: str) -> MappingProxyType:
    out = {}
    total = ZERO
    for key, value in mass.items():
        if not valid(key):
            raise SpaceError(f"{key!r} is not in {where}")
        m = as_fraction(value)
        if m < 0 or m > 1:
            raise DistributionError(f"mass {m} at {key!r} is outside [0, 1]")
        if m:
            out[key] = m
            total += m
    if total > 1:
        raise DistributionError(f"total mass {total} exceeds 1")
    return MappingProxyType(out)


class SubDistribution:
    """A mass function over a finite space with total mass at most one.

    Only non-zero masses are stored; lookups of other atoms of the space
    return ``Fraction(0)``.
    """

    __slots__ = ("space", "mass", "_hash")

    def __init__(self, space: SampleSpace, mass: Mapping[Atom, Any] = MappingProxyType({})):
        if not isinstance(space, SampleSpace):
            space = SampleSpace(space)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "mass", _freeze_masses(mass, space.__contains__, repr(space)))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("SubDistribution is immutable")

    def __getitem__(self, atom) -> Fraction:
        if atom not in self.space:
            raise SpaceError(f"atom {atom!r} is not in {self.space!r}")
        return self.mass.get(atom, ZERO)

    def __call__(self, atom) -> Fraction:
        return self[atom]

    def __eq__(self, other):
        if not isinstance(other, SubDistribution):
            return NotImplemented
        return self.space == other.space and dict(self.mass) == dict(other.mass)

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.space, frozenset(self.mass.items()))))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{a!r}: {m}" for a, m in self.items())
        return f"SubDistribution({{{body}}})"

    def items(self):
        """(atom, mass) pairs of the support, in space order."""
        return [(a, self.mass[a]) for a in self.space if a in self.mass]

    @property
    def total(self) -> Fraction:
        return sum(self.mass.values(), ZERO)

    @property
    def is_proper(self) -> bool:
        return self.total == 1

    def support(self) -> tuple:
        return tuple(a for a in self.space if a in self.mass)


class JointSubDistribution:
    """A sub-distribution over the product of two spaces."""

    __slots__ = ("left_space", "right_space", "mass", "_hash")

    def __init__(self, left_space: SampleSpace, right_space: SampleSpace,
                 mass: Mapping[tuple, Any] = MappingProxyType({})):
        if not isinstance(left_space, SampleSpace):
            left_space = SampleSpace(left_space)
        if not isinstance(right_space, SampleSpace):
            right_space = SampleSpace(right_space)

        def valid(key):
            return (isinstance(key, tuple) and len(key) == 2
                    and key[0] in left_space and key[1] in right_space)

        object.__setattr__(self, "left_space", left_space)
        object.__setattr__(self, "right_space", right_space)
        object.__setattr__(self, "mass", _freeze_masses(
            mass, valid, f"{left_space!r} x {right_space!r}"))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("JointSubDistribution is immutable")

    def __getitem__(self, pair) -> Fraction:
        a, b = pair
        if a not in self.left_space or b not in self.right_space:
            raise SpaceError(f"pair {pair!r} is outside the joint space")
        return self.mass.get((a, b), ZERO)

    def __call__(self, a, b) -> Fraction:
        return self[a, b]

    def __eq__(self, other):
        if not isinstance(other, JointSubDistribution):
            return NotImplemented
        return (self.left_space == other.left_space
                and self.right_space == other.right_space
                and dict(self.mass) == dict(other.mass))

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(
                (self.left_space, self.right_space, frozenset(self.mass.items()))))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{a!r}, {b!r}: {m}" for (a, b), m in self.items())
        return f"JointSubDistribution({{{body}}})"

    def pairs(self):
        """Every pair of the joint space, row-major in space order."""
        return itertools.product(self.left_space, self.right_space)

    def items(self):
        """((a, b), mass) for the support, row-major in space order."""
        return [(p, self.mass[p]) for p in self.pairs() if p in self.mass]

    @property
    def total(self) -> Fraction:
        return sum(self.mass.values(), ZERO)

    def support(self) -> tuple:
        return tuple(p for p in self.pairs() if p in self.mass)

    def transpose(self) -> "JointSubDistribution":
        return JointSubDistribution(self.right_space, self.left_space,
                                    {(b, a): m for (a, b), m in self.mass.items()})

    def respace(self, left_space: SampleSpace, right_space: SampleSpace) -> "JointSubDistribution":
        """Re-home the masses on (typically larger) spaces; padding is zero."""
        return JointSubDistribution(left_space, right_space, self.mass)


# -- constructors -------------------------------------------------------------

def null(space: SampleSpace) -> SubDistribution:
    return SubDistribution(space, {})


def unit(space: SampleSpace, atom) -> SubDistribution:
    """Dirac mass at ``atom``."""
    if atom not in space:
        raise SpaceError(f"atom {atom!r} is not in {space!r}")
    return SubDistribution(space, {atom: ONE})


def uniform(space: SampleSpace, atoms: Iterable[Atom] | None = None) -> SubDistribution:
    atoms = tuple(space) if atoms is None else space.ordered(atoms)
    if not atoms:
        return null(space)
    share = Fraction(1, len(atoms))
    return SubDistribution(space, {a: share for a in atoms})


def product(mu1: SubDistribution, mu2: SubDistribution) -> JointSubDistribution:
    return JointSubDistribution(mu1.space, mu2.space, {
        (a, b): p * q for a, p in mu1.items() for b, q in mu2.items()})


# -- operations ---------------------------------------------------------------

def event_prob(mu: SubDistribution, event: Iterable[Atom]) -> Fraction:
    event = mu.space.check(event)
    return sum((m for a, m in mu.mass.items() if a in event), ZERO)


def _kernel_fn(kernel: Kernel) -> Callable[[Any], SubDistribution]:
    if isinstance(kernel, Mapping):
        return kernel.__getitem__
    return kernel


def bind(mu: SubDistribution, kernel: Kernel, space: SampleSpace | None = None) -> SubDistribution:
    """Kleisli extension: ``b -> sum_a mu(a) * kernel(a)(b)``.

    The kernel is evaluated on every atom of ``mu.space`` so that a
    kernel returning a distribution over the wrong space is caught even
    where ``mu`` has no mass.  ``space`` pins the target space; it is
    otherwise taken from the kernel's first output and is required when
    ``mu.space`` is empty.
    """
    k = _kernel_fn(kernel)
    out: dict = {}
    for a in mu.space:
        nu = k(a)
        if not isinstance(nu, SubDistribution):
            raise SpaceError(f"kernel returned {type(nu).__name__} at {a!r}")
        if space is None:
            space = nu.space
        elif nu.space != space:
            raise SpaceError(f"kernel output at {a!r} lives over {nu.space!r}, expected {space!r}")
        p = mu.mass.get(a)
        if p:
            for b, q in nu.mass.items():
                out[b] = out.get(b, ZERO) + p * q
    if space is None:
        raise SpaceError("cannot infer the target space of a bind over an empty space")
    return SubDistribution(space, out)


def pushforward(f, mu: SubDistribution, space: SampleSpace) -> SubDistribution:
    """Image measure of ``mu`` under the total map ``f`` into ``space``."""
    fn = f.__getitem__ if isinstance(f, Mapping) else f
    out: dict = {}
    for a in mu.space:
        b = fn(a)
        if b not in space:
            raise SpaceError(f"map sends {a!r} to {b!r}, which is not in {space!r}")
        m = mu.mass.get(a)
        if m:
            out[b] = out.get(b, ZERO) + m
    return SubDistribution(space, out)


def marginal(side: str, joint: JointSubDistribution) -> SubDistribution:
    """Row sums (``side="left"``) or column sums (``side="right"``)."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    idx = 0 if side == "left" else 1
    space = joint.left_space if idx == 0 else joint.right_space
    out: dict = {}
    for pair, m in joint.mass.items():
        out[pair[idx]] = out.get(pair[idx], ZERO) + m
    return SubDistribution(space, out)


def restrict(mu, atoms: Iterable) -> Any:
    """Zero out the masses outside ``atoms``.

    Works for plain and joint sub-distributions; for a joint, ``atoms`` is
    a set of pairs.
    """
    if isinstance(mu, JointSubDistribution):
        keep = frozenset(atoms)
        for a, b in keep:
            if a not in mu.left_space or b not in mu.right_space:
                raise SpaceError(f"pair {(a, b)!r} is outside the joint space")
        return JointSubDistribution(mu.left_space, mu.right_space,
                                    {p: m for p, m in mu.mass.items() if p in keep})
    keep = mu.space.check(atoms)
    return SubDistribution(mu.space, {a: m for a, m in mu.mass.items() if a in keep})


def star_extend(joint: JointSubDistribution) -> JointSubDistribution:
    """Embed a joint over ``A x B*`` or ``A* x B`` into ``A* x B*``."""
    left_ext = joint.left_space.is_extended
    right_ext = joint.right_space.is_extended
    if left_ext and right_ext:
        raise SpaceError("both sides are already star-extended")
    if not left_ext and not right_ext:
        raise SpaceError("exactly one side must already be star-extended")
    left = joint.left_space if left_ext else joint.left_space.extended()
    right = joint.right_space if right_ext else joint.right_space.extended()
    return joint.respace(left, right)


def extend_both(joint: JointSubDistribution) -> JointSubDistribution:
    """Embed a joint into ``A* x B*`` whatever its current extension state."""
    left = joint.left_space if joint.left_space.is_extended else joint.left_space.extended()
    right = joint.right_space if joint.right_space.is_extended else joint.right_space.extended()
    return joint.respace(left, right)
