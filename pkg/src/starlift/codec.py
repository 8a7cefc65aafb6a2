"""JSON encoding of problems and reports.

Rationals travel as canonical ``"p/q"`` strings (reduced, ``q > 0``, always
with the slash), the star atom as ``"@star"``, distributions as lists of
``[atom, mass]`` and joints as lists of ``[left, right, mass]``, all in
space order with zero masses omitted.  Canonical files are what
:func:`dump` produces: sorted keys, two-space indent, trailing newline.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any

from .dist import STAR, JointSubDistribution, SampleSpace, SubDistribution
from .errors import SpaceError
from .relation import FiniteRelation

STAR_TOKEN = "@star"
_RATIONAL = re.compile(r"^(0|[1-9][0-9]*)/([1-9][0-9]*)$")


class DecodeError(ValueError):
    """A structurally valid document with meaningless content."""


def dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def enc_q(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def dec_q(s: str) -> Fraction:
    m = _RATIONAL.match(s) if isinstance(s, str) else None
    if not m:
        raise DecodeError(f"{s!r} is not a rational of the form \"p/q\"")
    return Fraction(int(m.group(1)), int(m.group(2)))


def enc_atom(a):
    return STAR_TOKEN if a is STAR else a


def dec_atom(x):
    if x == STAR_TOKEN:
        return STAR
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise DecodeError(f"atom {x!r} must be a string or an integer")
    return x


def dec_space(items) -> SampleSpace:
    atoms = []
    for x in items:
        if x == STAR_TOKEN:
            raise DecodeError(f"{STAR_TOKEN!r} is reserved and cannot name a user atom")
        atoms.append(dec_atom(x))
    try:
        return SampleSpace(atoms)
    except SpaceError as exc:
        raise DecodeError(str(exc)) from exc


def enc_space(space: SampleSpace) -> list:
    return [enc_atom(a) for a in space]


def enc_dist(mu: SubDistribution) -> list:
    return [[enc_atom(a), enc_q(m)] for a, m in mu.items()]


def dec_dist(space: SampleSpace, items) -> SubDistribution:
    mass: dict = {}
    for atom, q in items:
        a = dec_atom(atom)
        if a in mass:
            raise DecodeError(f"atom {atom!r} listed twice")
        mass[a] = dec_q(q)
    return SubDistribution(space, mass)


def enc_joint(joint: JointSubDistribution) -> list:
    return [[enc_atom(a), enc_atom(b), enc_q(m)] for (a, b), m in joint.items()]


def dec_joint(left: SampleSpace, right: SampleSpace, items) -> JointSubDistribution:
    mass: dict = {}
    for a, b, q in items:
        key = (dec_atom(a), dec_atom(b))
        if key in mass:
            raise DecodeError(f"pair {[a, b]!r} listed twice")
        mass[key] = dec_q(q)
    return JointSubDistribution(left, right, mass)


def enc_relation(rel: FiniteRelation) -> list:
    return [[enc_atom(a), enc_atom(b)] for a, b in rel.ordered_pairs()]


def dec_relation(left: SampleSpace, right: SampleSpace, items) -> FiniteRelation:
    return FiniteRelation(left, right, ((dec_atom(a), dec_atom(b)) for a, b in items))


def enc_subset(space: SampleSpace, atoms) -> list:
    return [enc_atom(a) for a in space.ordered(atoms)]


def dec_subset(space: SampleSpace, items) -> frozenset:
    return space.check(dec_atom(x) for x in items)


def enc_float(x: float) -> Any:
    """JSON has no infinity; it is spelled ``"+inf"``."""
    return "+inf" if x == float("inf") else x
