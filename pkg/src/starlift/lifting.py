"""Witness containers, validation for every lifting flavour, and witness rewrites.

Star-style witnesses are a pair ``(eta_left, eta_right)`` with ``eta_left``
over ``A x B*`` and ``eta_right`` over ``A* x B``; the star is stored as the
:data:`~starlift.dist.STAR` atom so that distance checks are ordinary
operations on joints over ``A* x B*``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Union

from .dist import (STAR, ZERO, JointSubDistribution, SampleSpace, SubDistribution,
                   extend_both, marginal)
from .divergence import (DEFAULT_TOLERANCE, FDivergence, PrivacyParams, dp_divergence,
                         dp_divergence_event, f_divergence)
from .errors import SpaceError, ValidationFailed, WitnessShapeError
from .relation import FiniteRelation


@dataclass(frozen=True)
class LiftingKind:
    """One of Star, Two, One, SymStar, SymOne, or FDivStar(f)."""

    tag: str
    fdiv: Optional[FDivergence] = None

    TAGS = ("star", "two", "one", "sym-star", "sym-one", "fdiv-star")

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ValueError(f"unknown lifting kind {self.tag!r}")
        if (self.tag == "fdiv-star") != (self.fdiv is not None):
            raise ValueError("exactly the fdiv-star kind carries an f-divergence")

    @property
    def star_shaped(self) -> bool:
        return self.tag in ("star", "sym-star", "fdiv-star")

    @property
    def single_witness(self) -> bool:
        return self.tag in ("one", "sym-one")

    @property
    def symmetric(self) -> bool:
        return self.tag in ("sym-star", "sym-one")

    def __str__(self):
        return self.tag if self.fdiv is None else f"{self.tag}({self.fdiv.name})"


STAR_KIND = LiftingKind("star")
TWO = LiftingKind("two")
ONE = LiftingKind("one")
SYM_STAR = LiftingKind("sym-star")
SYM_ONE = LiftingKind("sym-one")


def fdiv_star(fdiv: FDivergence) -> LiftingKind:
    return LiftingKind("fdiv-star", fdiv)


@dataclass(frozen=True)
class LiftingJudgment:
    """The claim ``mu1 R^(k, delta) mu2`` for a given lifting kind."""

    kind: LiftingKind
    mu1: SubDistribution
    mu2: SubDistribution
    relation: FiniteRelation
    params: PrivacyParams

    def __post_init__(self):
        if self.mu1.space != self.relation.left_space:
            raise SpaceError("mu1 must live over the relation's left space")
        if self.mu2.space != self.relation.right_space:
            raise SpaceError("mu2 must live over the relation's right space")

    @property
    def left_space(self) -> SampleSpace:
        return self.relation.left_space

    @property
    def right_space(self) -> SampleSpace:
        return self.relation.right_space

    def with_kind(self, kind: LiftingKind) -> "LiftingJudgment":
        return dataclasses.replace(self, kind=kind)

    def with_params(self, params: PrivacyParams) -> "LiftingJudgment":
        return dataclasses.replace(self, params=params)


@dataclass(frozen=True)
class WitnessPair:
    """Left and right witnesses.

    For star-shaped kinds ``eta_left`` lives over ``A x B*`` and
    ``eta_right`` over ``A* x B``; for the two-witness kind both live over
    ``A x B``.
    """

    eta_left: JointSubDistribution
    eta_right: JointSubDistribution


Witness = Union[WitnessPair, JointSubDistribution]


@dataclass(frozen=True)
class ValidationReport:
    holds: bool
    failed_condition: Optional[str]
    distance: Any
    slack: Any
    counterexample: Optional[frozenset] = None

    FAILURES = ("marginal-left", "marginal-right", "support", "distance")

    def __bool__(self):
        return self.holds


# -- shape checks -------------------------------------------------------------

def _check_joint_shape(joint, left: SampleSpace, right: SampleSpace, what: str):
    if not isinstance(joint, JointSubDistribution):
        raise WitnessShapeError(f"{what} must be a JointSubDistribution")
    if joint.left_space != left or joint.right_space != right:
        raise WitnessShapeError(
            f"{what} lives over {joint.left_space!r} x {joint.right_space!r}, "
            f"expected {left!r} x {right!r}")


def check_shape(j: LiftingJudgment, w: Witness) -> None:
    a, b = j.left_space, j.right_space
    if j.kind.single_witness:
        _check_joint_shape(w, a, b, "the single witness")
        return
    if not isinstance(w, WitnessPair):
        raise WitnessShapeError(f"kind {j.kind} needs a WitnessPair")
    if j.kind.star_shaped:
        _check_joint_shape(w.eta_left, a, b.extended(), "eta_left")
        _check_joint_shape(w.eta_right, a.extended(), b, "eta_right")
    else:
        _check_joint_shape(w.eta_left, a, b, "eta_left")
        _check_joint_shape(w.eta_right, a, b, "eta_right")


# -- validation ---------------------------------------------------------------

def _marginal_mismatch(got: SubDistribution, want: SubDistribution, exact: bool):
    """Atoms where ``got != want`` (exact) or ``got > want`` (bounded)."""
    bad = [x for x in want.space if (got[x] != want[x] if exact else got[x] > want[x])]
    return frozenset(bad)


def _support_outside(joint: JointSubDistribution, rel: FiniteRelation) -> frozenset:
    return frozenset((a, b) for (a, b) in joint.mass
                     if a is not STAR and b is not STAR and (a, b) not in rel.pairs)


def _fail(condition, distance, slack, counterexample):
    return ValidationReport(False, condition, distance, slack, counterexample)


def _distance_part(j: LiftingJudgment, w: Witness, tol: float):
    """(distance, ok, event) for the kind's distance condition."""
    k, delta = j.params.k, j.params.delta
    tag = j.kind.tag
    if tag in ("one", "sym-one"):
        p1 = marginal("left", w)
        dist = dp_divergence(k, j.mu1, p1)
        event = dp_divergence_event(k, j.mu1, p1)
        if tag == "sym-one":
            p2 = marginal("right", w)
            d2 = dp_divergence(k, j.mu2, p2)
            if d2 > dist:
                dist, event = d2, dp_divergence_event(k, j.mu2, p2)
        return dist, dist <= delta, event
    if tag == "two":
        left, right = w.eta_left, w.eta_right
    else:
        left, right = extend_both(w.eta_left), extend_both(w.eta_right)
    if tag == "fdiv-star":
        dist = f_divergence(j.kind.fdiv, left, right)
        ok = not math.isinf(dist) and dist <= float(delta) + tol
        return dist, ok, None
    dist = dp_divergence(k, left, right)
    event = dp_divergence_event(k, left, right)
    if tag == "sym-star":
        back = dp_divergence(k, right, left)
        if back > dist:
            dist, event = back, dp_divergence_event(k, right, left)
    return dist, dist <= delta, event


def validate_witnesses(j: LiftingJudgment, w: Witness, *,
                       tol: float = DEFAULT_TOLERANCE) -> ValidationReport:
    """Check every condition of ``j.kind`` and report the first that fails.

    Conditions are examined in the order marginal-left, marginal-right,
    support, distance.  The distance is computed exactly with the
    pointwise formula except for f-divergence kinds, which compare in
    floating point with tolerance ``tol``.
    """
    check_shape(j, w)
    rel = j.relation
    distance, dist_ok, event = _distance_part(j, w, tol)
    if isinstance(distance, Fraction):
        slack = j.params.delta - distance
    else:
        slack = float(j.params.delta) - distance

    if j.kind.single_witness:
        bad = _marginal_mismatch(marginal("left", w), j.mu1, exact=False)
        if bad:
            return _fail("marginal-left", distance, slack, bad)
        bad = _marginal_mismatch(marginal("right", w), j.mu2, exact=False)
        if bad:
            return _fail("marginal-right", distance, slack, bad)
        bad = _support_outside(w, rel)
        if bad:
            return _fail("support", distance, slack, bad)
    else:
        bad = _marginal_mismatch(marginal("left", w.eta_left), j.mu1, exact=True)
        if bad:
            return _fail("marginal-left", distance, slack, bad)
        bad = _marginal_mismatch(marginal("right", w.eta_right), j.mu2, exact=True)
        if bad:
            return _fail("marginal-right", distance, slack, bad)
        bad = _support_outside(w.eta_left, rel) | _support_outside(w.eta_right, rel)
        if bad:
            return _fail("support", distance, slack, bad)
    if not dist_ok:
        return _fail("distance", distance, slack, event)
    return ValidationReport(True, None, distance, slack, None)


def require_valid(j: LiftingJudgment, w: Witness, what: str = "witness") -> ValidationReport:
    report = validate_witnesses(j, w)
    if not report.holds:
        raise ValidationFailed(f"{what} fails {j.kind}: {report.failed_condition}", report)
    return report


# -- witness rewrites ---------------------------------------------------------

def restrict_witness_support(j: LiftingJudgment, w: WitnessPair) -> WitnessPair:
    """Move mass outside ``supp(mu1)* x supp(mu2)*`` onto the star fringe.

    Left-witness mass at ``(a, b)`` with ``mu2(b) = 0`` goes to ``(a, *)``;
    right-witness mass at ``(a, b)`` with ``mu1(a) = 0`` goes to ``(*, b)``.
    Marginals and the distance are unchanged.
    """
    if not j.kind.star_shaped:
        raise WitnessShapeError("support restriction applies to star-shaped kinds")
    require_valid(j, w)
    s1, s2 = set(j.mu1.mass), set(j.mu2.mass)
    left: dict = {}
    for (a, b), m in w.eta_left.mass.items():
        key = (a, b) if b is STAR or b in s2 else (a, STAR)
        left[key] = left.get(key, ZERO) + m
    right: dict = {}
    for (a, b), m in w.eta_right.mass.items():
        key = (a, b) if a is STAR or a in s1 else (STAR, b)
        right[key] = right.get(key, ZERO) + m
    return WitnessPair(
        JointSubDistribution(w.eta_left.left_space, w.eta_left.right_space, left),
        JointSubDistribution(w.eta_right.left_space, w.eta_right.right_space, right))


def normalize_witnesses(j: LiftingJudgment, w: WitnessPair) -> WitnessPair:
    """Rewrite Star witnesses so that ``eta_r <= eta_l <= k * eta_r`` on ``A x B``.

    Takes ``nu_l = min(eta_l, k*eta_r)`` and ``nu_r = min(eta_l, eta_r)``
    off the fringe and tops the star row/column up to the marginals.
    """
    if j.kind.tag != "star":
        raise WitnessShapeError("normalization is defined for the Star kind")
    require_valid(j, w)
    k = j.params.k
    a_sp, b_sp = j.left_space, j.right_space
    left: dict = {}
    right: dict = {}
    for a in a_sp:
        for b in b_sp:
            l, r = w.eta_left.mass.get((a, b), ZERO), w.eta_right.mass.get((a, b), ZERO)
            if l or r:
                nl, nr = min(l, k * r), min(l, r)
                if nl:
                    left[a, b] = nl
                if nr:
                    right[a, b] = nr
    for a, m in j.mu1.items():
        rest = m - sum((left.get((a, b), ZERO) for b in b_sp), ZERO)
        if rest:
            left[a, STAR] = rest
    for b, m in j.mu2.items():
        rest = m - sum((right.get((a, b), ZERO) for a in a_sp), ZERO)
        if rest:
            right[STAR, b] = rest
    return WitnessPair(JointSubDistribution(a_sp, b_sp.extended(), left),
                       JointSubDistribution(a_sp.extended(), b_sp, right))


def star_to_one(j: LiftingJudgment, w: WitnessPair, *, symmetric: bool = False) -> JointSubDistribution:
    """Pointwise minimum of the two witnesses on ``A x B``."""
    require_valid(j.with_kind(SYM_STAR if symmetric else STAR_KIND), w, "source witness")
    a_sp, b_sp = j.left_space, j.right_space
    out = {}
    for (a, b), m in w.eta_left.mass.items():
        if b is not STAR:
            r = w.eta_right.mass.get((a, b), ZERO)
            if r:
                out[a, b] = min(m, r)
    return JointSubDistribution(a_sp, b_sp, out)


def _scaled_side(mu: SubDistribution, proj: SubDistribution, k: Fraction) -> dict:
    """Per-atom factor ``(mu(x) - slack(x)) / proj(x)``, 0 when ``proj(x) = 0``.

    ``slack(x) = max(mu(x) - k*proj(x), 0)``, so the numerator is
    ``min(mu(x), k*proj(x))``.
    """
    return {x: (min(mu[x], k * p) / p) for x, p in proj.mass.items()}


def one_to_star(j: LiftingJudgment, w: JointSubDistribution, *,
                symmetric: bool = False) -> WitnessPair:
    """Rescale a single witness into a star witness pair.

    The left witness scales row ``a`` by ``min(mu1(a), k*pi1(a)) / pi1(a)``
    and puts the remainder of ``mu1(a)`` on ``(a, *)``.  The right witness is
    the single witness itself (or, in the symmetric case, the column-scaled
    counterpart) topped up on ``(*, b)``.
    """
    require_valid(j.with_kind(SYM_ONE if symmetric else ONE), w, "source witness")
    k = j.params.k
    a_sp, b_sp = j.left_space, j.right_space
    row = _scaled_side(j.mu1, marginal("left", w), k)
    col = _scaled_side(j.mu2, marginal("right", w), k) if symmetric else None
    left: dict = {}
    right: dict = {}
    for (a, b), m in w.mass.items():
        left[a, b] = m * row[a]
        right[a, b] = m * col[b] if symmetric else m
    for a, m in j.mu1.items():
        rest = m - sum((v for (x, _), v in left.items() if x == a), ZERO)
        if rest:
            left[a, STAR] = rest
    for b, m in j.mu2.items():
        rest = m - sum((v for (x, y), v in right.items() if y == b and x is not STAR), ZERO)
        if rest:
            right[STAR, b] = rest
    return WitnessPair(JointSubDistribution(a_sp, b_sp.extended(), left),
                       JointSubDistribution(a_sp.extended(), b_sp, right))


def convert_one_star(direction: str, symmetric: bool, j: LiftingJudgment, w: Witness):
    """Dispatch to :func:`star_to_one` or :func:`one_to_star`.

    ``direction`` is ``"star->one"`` or ``"one->star"``.  The kind stored in
    ``j`` is ignored; the source kind follows from the direction and
    ``symmetric``.
    """
    if direction == "star->one":
        return star_to_one(j, w, symmetric=symmetric)
    if direction == "one->star":
        return one_to_star(j, w, symmetric=symmetric)
    raise ValueError(f"direction must be 'star->one' or 'one->star', not {direction!r}")


def two_as_star(w: WitnessPair) -> WitnessPair:
    """Reinterpret two-witness liftings over ``A x B`` as star witnesses."""
    return WitnessPair(w.eta_left.respace(w.eta_left.left_space,
                                          w.eta_left.right_space.extended()),
                       w.eta_right.respace(w.eta_right.left_space.extended(),
                                           w.eta_right.right_space))


@dataclass(frozen=True)
class PrecheckResult:
    feasible: bool
    side: Optional[str] = None
    atom: Any = None

    def __bool__(self):
        return self.feasible


def two_lifting_feasibility_precheck(j: LiftingJudgment) -> PrecheckResult:
    """Necessary condition for a two-witness lifting to exist.

    Every atom carrying mass must be related to something: a right atom
    with no predecessor cannot receive the right marginal, a left atom
    with no successor cannot ship the left marginal.  Right atoms are
    examined first, each side in space order.
    """
    if j.kind.tag != "two":
        raise ValueError("the precheck applies to the two-witness kind")
    rel = j.relation
    has_pred = {b for _, b in rel.pairs}
    has_succ = {a for a, _ in rel.pairs}
    for b in j.mu2.support():
        if b not in has_pred:
            return PrecheckResult(False, "right", b)
    for a in j.mu1.support():
        if a not in has_succ:
            return PrecheckResult(False, "left", a)
    return PrecheckResult(True)
