"""Composition and transfer rules for star liftings.

Parameter bookkeeping is exact except for the advanced rule, whose
irrational factor is evaluated in high-precision decimal arithmetic and
rounded up to a rational.
"""
from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional

from .dist import (STAR, ZERO, JointSubDistribution, SampleSpace, SubDistribution,
                   _kernel_fn, bind, event_prob, extend_both, pushforward, unit)
from .divergence import PrivacyParams, ceil_significant
from .errors import HypothesisError, SpaceError
from .lifting import (STAR_KIND, SYM_STAR, LiftingJudgment, WitnessPair, require_valid,
                      restrict_witness_support, validate_witnesses)
from .relation import (FiniteRelation, compose, conjoin_left, conjoin_right, iff_relation,
                       implies_left, implies_right, pullback)
from .strassen import NotLiftable, synthesize_star_lifting

_fn = _kernel_fn


def _map_fn(f):
    return f.__getitem__ if isinstance(f, Mapping) else f


# -- transitivity -------------------------------------------------------------

def transitive_compose(j1: LiftingJudgment, w1: WitnessPair,
                       j2: LiftingJudgment, w2: WitnessPair):
    """``mu1 R mu2`` and ``mu2 S mu3`` give ``mu1 (S o R) mu3`` at ``(k k', delta + k delta')``.

    Returns ``(params, relation, judgment)``; the judgment is the composed
    Star claim, which callers can certify by synthesis or the subset oracle.
    """
    for j in (j1, j2):
        if j.kind.tag != "star":
            raise HypothesisError("transitivity is stated for the Star kind")
    if j1.right_space != j2.left_space:
        raise SpaceError("middle spaces differ")
    if j1.mu2 != j2.mu1:
        raise HypothesisError("the middle distributions differ")
    require_valid(j1, w1, "first witness")
    require_valid(j2, w2, "second witness")
    k1, d1 = j1.params.k, j1.params.delta
    k2, d2 = j2.params.k, j2.params.delta
    params = PrivacyParams(k1 * k2, d1 + k1 * d2)
    rel = compose(j2.relation, j1.relation)
    return params, rel, LiftingJudgment(STAR_KIND, j1.mu1, j2.mu2, rel, params)


# -- one stage of witness composition -----------------------------------------

def _product_star_right(nu: SubDistribution) -> dict:
    return {(x, STAR): m for x, m in nu.mass.items()}


def _product_star_left(nu: SubDistribution) -> dict:
    return {(STAR, y): m for y, m in nu.mass.items()}


def _step(state: Mapping, tt: bool, rel: FiniteRelation, g, h, witnesses: Mapping) -> dict:
    """Push a distribution over ``A* x B*`` through one stage.

    Related pairs follow their stored witness (left for ``tt``, right
    otherwise); ``(a, *)`` follows ``g(a) x unit(*)``; ``(*, b)`` follows
    ``unit(*) x h(b)``; ``(*, *)`` stays put; unrelated pairs are dropped.
    """
    out: dict = {}

    def add(dist_items, weight):
        for key, m in dist_items:
            out[key] = out.get(key, ZERO) + weight * m

    for (a, b), m in state.items():
        if a is STAR and b is STAR:
            add([((STAR, STAR), 1)], m)
        elif b is STAR:
            add(_product_star_right(g(a)).items(), m)
        elif a is STAR:
            add(_product_star_left(h(b)).items(), m)
        elif (a, b) in rel.pairs:
            w = witnesses[a, b]
            add((w.eta_left if tt else w.eta_right).mass.items(), m)
    return {key: m for key, m in out.items() if m}


def _witness_pair(left: dict, right: dict, a_sp: SampleSpace, b_sp: SampleSpace) -> WitnessPair:
    return WitnessPair(JointSubDistribution(a_sp, b_sp.extended(), left),
                       JointSubDistribution(a_sp.extended(), b_sp, right))


def _check_inner(rel: FiniteRelation, g, h, witnesses: Mapping, params: PrivacyParams,
                 next_rel: FiniteRelation, kind, require_proper: bool):
    for a, b in rel.ordered_pairs():
        if (a, b) not in witnesses:
            raise HypothesisError(f"no witness stored for related pair {(a, b)!r}")
        ga, hb = g(a), h(b)
        if ga.space != next_rel.left_space or hb.space != next_rel.right_space:
            raise SpaceError(f"kernel outputs at {(a, b)!r} live over the wrong spaces")
        j = LiftingJudgment(kind, ga, hb, next_rel, params)
        report = validate_witnesses(j, witnesses[a, b])
        if not report.holds:
            raise HypothesisError(
                f"witness for {(a, b)!r} fails {kind}: {report.failed_condition}")
    if require_proper:
        for a in rel.left_space:
            if not g(a).is_proper:
                raise HypothesisError(f"left kernel at {a!r} is not a proper distribution")
        for b in rel.right_space:
            if not h(b).is_proper:
                raise HypothesisError(f"right kernel at {b!r} is not a proper distribution")


def bind_compose_witnesses(j: LiftingJudgment, w: WitnessPair, left_kernel, right_kernel,
                           inner: Mapping, inner_params: PrivacyParams,
                           target: FiniteRelation):
    """Witnesses for ``bind(mu1, g) ~ bind(mu2, h)`` at ``(k k', delta + delta')``.

    ``inner`` maps each related pair ``(a, b)`` to witnesses of
    ``g(a) ~ h(b)`` for ``target`` at ``inner_params``.  The new witnesses
    are the expectations of the stage kernel under the outer witnesses.
    For an f-divergence kind the inner witnesses are judged with the same
    divergence and only the deltas add.  Returns ``(judgment, witnesses)``.
    """
    if j.kind.tag not in ("star", "fdiv-star"):
        raise HypothesisError("sequential composition is stated for the Star and f-divergence kinds")
    require_valid(j, w, "outer witness")
    g, h = _fn(left_kernel), _fn(right_kernel)
    _check_inner(j.relation, g, h, inner, inner_params, target, j.kind, False)
    left = _step(extend_both(w.eta_left).mass, True, j.relation, g, h, inner)
    right = _step(extend_both(w.eta_right).mass, False, j.relation, g, h, inner)
    params = PrivacyParams(j.params.k * inner_params.k, j.params.delta + inner_params.delta)
    nu1 = bind(j.mu1, g, target.left_space)
    nu2 = bind(j.mu2, h, target.right_space)
    out_j = LiftingJudgment(j.kind, nu1, nu2, target, params)
    return out_j, _witness_pair(left, right, target.left_space, target.right_space)


# -- up-to-bad and one-sided conjunction ---------------------------------------

def _side_delta(side: str, theta, j: LiftingJudgment) -> Fraction:
    if side == "left":
        bad = frozenset(j.left_space) - j.left_space.check(theta)
        return j.params.delta + event_prob(j.mu1, bad)
    if side == "right":
        bad = frozenset(j.right_space) - j.right_space.check(theta)
        return j.params.delta + j.params.k * event_prob(j.mu2, bad)
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def up_to_bad(side: str, theta, rel: FiniteRelation, j: LiftingJudgment,
              w: WitnessPair) -> LiftingJudgment:
    """From a lifting of ``theta => rel`` to a lifting of ``rel``.

    Left: ``delta + mu1[not theta]``; right: ``delta + k * mu2[not theta]``.
    """
    if j.kind.tag != "star":
        raise HypothesisError("up-to-bad is stated for the Star kind")
    conditional = (implies_left if side == "left" else implies_right)(theta, rel)
    if j.relation != conditional:
        raise HypothesisError("the judgment's relation is not theta => rel")
    require_valid(j, w)
    params = PrivacyParams(j.params.k, _side_delta(side, theta, j))
    return LiftingJudgment(STAR_KIND, j.mu1, j.mu2, rel, params)


def conjoin_one_sided(side: str, theta, j: LiftingJudgment, w: WitnessPair) -> LiftingJudgment:
    """Strengthen the relation to ``theta /\\ rel`` at the up-to-bad price."""
    if j.kind.tag != "star":
        raise HypothesisError("one-sided conjunction is stated for the Star kind")
    require_valid(j, w)
    conj = (conjoin_left if side == "left" else conjoin_right)(theta, j.relation)
    params = PrivacyParams(j.params.k, _side_delta(side, theta, j))
    return LiftingJudgment(STAR_KIND, j.mu1, j.mu2, conj, params)


# -- subset coupling ----------------------------------------------------------

@dataclass(frozen=True)
class SubsetCoupling:
    holds: bool
    relation: FiniteRelation
    witnesses: Optional[WitnessPair] = None
    failed: Optional[str] = None  # "inside" or "outside"
    gap: Optional[Fraction] = None

    def __bool__(self):
        return self.holds


def subset_coupling(mu1: SubDistribution, mu2: SubDistribution, p1, p2, k, delta) -> SubsetCoupling:
    """Decide ``mu1 ~ mu2`` for ``a1 in P1 <=> a2 in P2`` by two inequalities.

    ``mu1[P1] <= k mu2[P2] + delta`` and the same for the complements.  The
    synthesis engine is run as well and must agree.
    """
    params = PrivacyParams(k, delta)
    k, delta = params.k, params.delta
    p1, p2 = mu1.space.check(p1), mu2.space.check(p2)
    rel = iff_relation(mu1.space, mu2.space, p1, p2)
    in_gap = event_prob(mu1, p1) - k * event_prob(mu2, p2) - delta
    out_gap = (event_prob(mu1, frozenset(mu1.space) - p1)
               - k * event_prob(mu2, frozenset(mu2.space) - p2) - delta)
    result = synthesize_star_lifting(mu1, mu2, rel, k, delta)
    holds = in_gap <= 0 and out_gap <= 0
    if holds != (not isinstance(result, NotLiftable)):
        raise AssertionError("subset inequalities disagree with synthesis")
    if holds:
        return SubsetCoupling(True, rel, result)
    failed, gap = ("inside", in_gap) if in_gap > 0 else ("outside", out_gap)
    return SubsetCoupling(False, rel, None, failed, gap)


# -- mapping transfer ---------------------------------------------------------

def _push_joint(joint: JointSubDistribution, f1, f2, left: SampleSpace, right: SampleSpace):
    out: dict = {}
    for (a, b), m in joint.mass.items():
        key = (STAR if a is STAR else f1(a), STAR if b is STAR else f2(b))
        out[key] = out.get(key, ZERO) + m
    return JointSubDistribution(left, right, out)


def _class_weights(mu: SubDistribution, f) -> dict:
    """``alpha(a) = mu(a) / mu(f^-1(f(a)))``, zero on null classes."""
    cls: dict = {}
    for a in mu.space:
        cls[f(a)] = cls.get(f(a), ZERO) + mu[a]
    return {a: (mu[a] / cls[f(a)] if cls[f(a)] else ZERO) for a in mu.space}


def _source_witnesses(j: LiftingJudgment, w):
    if w is not None:
        require_valid(j, w, "source witness")
        return w
    if j.kind.tag != "star":
        raise HypothesisError("witnesses are required for this lifting kind")
    got = synthesize_star_lifting(j.mu1, j.mu2, j.relation, j.params.k, j.params.delta)
    if isinstance(got, NotLiftable):
        raise HypothesisError(f"the source judgment does not hold (subset {set(got.subset)!r})")
    return got


def mapping_transfer(direction: str, f1, f2, rel: FiniteRelation, j: LiftingJudgment,
                     w: Optional[WitnessPair] = None, *, originals=None):
    """Move a lifting along maps ``f1 : A1 -> B1`` and ``f2 : A2 -> B2``.

    ``forward``: ``j`` is ``mu1 S mu2`` with ``S`` the pullback of ``rel``;
    the result is ``f1(mu1) rel f2(mu2)`` with witnesses pushed forward
    (star mapped to star).  ``backward``: ``j`` is ``f1(mu1) rel f2(mu2)``,
    ``originals=(mu1, mu2)`` is required, and the witnesses are spread over
    each fibre in proportion to ``mu_i``.  Missing witnesses are synthesized
    for the Star kind.  Returns ``(judgment, witnesses)``; the witnesses are
    validated before returning.
    """
    if not j.kind.star_shaped:
        raise HypothesisError("mapping transfer needs a star-shaped kind")
    g1, g2 = _map_fn(f1), _map_fn(f2)
    if direction == "forward":
        a1, a2 = j.left_space, j.right_space
        s = pullback(g1, g2, rel, a1, a2)
        if j.relation != s:
            raise HypothesisError("the judgment's relation is not the pullback of rel")
        w = _source_witnesses(j, w)
        b1, b2 = rel.left_space, rel.right_space
        nu1, nu2 = pushforward(g1, j.mu1, b1), pushforward(g2, j.mu2, b2)
        out = WitnessPair(_push_joint(w.eta_left, g1, g2, b1, b2.extended()),
                          _push_joint(w.eta_right, g1, g2, b1.extended(), b2))
        target = LiftingJudgment(j.kind, nu1, nu2, rel, j.params)
    elif direction == "backward":
        if originals is None:
            raise HypothesisError("backward transfer needs originals=(mu1, mu2)")
        mu1, mu2 = originals
        if j.relation != rel:
            raise HypothesisError("the judgment's relation differs from rel")
        if (pushforward(g1, mu1, rel.left_space) != j.mu1
                or pushforward(g2, mu2, rel.right_space) != j.mu2):
            raise HypothesisError("the originals do not map onto the judged distributions")
        w = restrict_witness_support(j, _source_witnesses(j, w))
        al1, al2 = _class_weights(mu1, g1), _class_weights(mu2, g2)
        a1, a2 = mu1.space, mu2.space
        left: dict = {}
        right: dict = {}
        for x in a1:
            for y in a2:
                b = (g1(x), g2(y))
                m = al1[x] * al2[y]
                if m:
                    if w.eta_left.mass.get(b):
                        left[x, y] = m * w.eta_left.mass[b]
                    if w.eta_right.mass.get(b):
                        right[x, y] = m * w.eta_right.mass[b]
            if al1[x] and w.eta_left.mass.get((g1(x), STAR)):
                left[x, STAR] = al1[x] * w.eta_left.mass[g1(x), STAR]
        for y in a2:
            if al2[y] and w.eta_right.mass.get((STAR, g2(y))):
                right[STAR, y] = al2[y] * w.eta_right.mass[STAR, g2(y)]
        s = pullback(g1, g2, rel, a1, a2)
        out = _witness_pair(left, right, a1, a2)
        target = LiftingJudgment(j.kind, mu1, mu2, s, j.params)
    else:
        raise ValueError(f"direction must be 'forward' or 'backward', not {direction!r}")
    require_valid(target, out, "transferred witness")
    return target, out


# -- composition rules --------------------------------------------------------

@dataclass(frozen=True)
class CompositionRule:
    name: str
    apply: Callable[[Sequence[PrivacyParams]], PrivacyParams] = field(compare=False)
    symmetric_only: bool = False

    def __call__(self, steps: Sequence[PrivacyParams]) -> PrivacyParams:
        return self.apply(list(steps))


def _basic(steps):
    k, delta = Fraction(1), ZERO
    for p in steps:
        k *= p.k
        delta += p.delta
    return PrivacyParams(k, delta)


def basic_rule() -> CompositionRule:
    """Multiply the factors and add the deltas."""
    return CompositionRule("basic", _basic, False)


def _decimal(q: Fraction) -> Decimal:
    return Decimal(q.numerator) / Decimal(q.denominator)


def advanced_epsilon(epsilon, n: int, omega) -> Decimal:
    """``sqrt(2 n ln(1/omega)) * eps + n * eps * (e^eps - 1)`` at 60 digits."""
    with localcontext() as ctx:
        ctx.prec = 60
        eps = epsilon if isinstance(epsilon, Decimal) else _decimal(Fraction(str(epsilon)))
        om = omega if isinstance(omega, Decimal) else _decimal(Fraction(str(omega)))
        log_term = (Decimal(1) / om).ln()
        return (Decimal(2 * n) * log_term).sqrt() * eps + n * eps * (eps.exp() - 1)


def advanced_rule(omega) -> CompositionRule:
    """The ``sqrt(2 n ln(1/omega))`` rule for ``n`` identical symmetric steps.

    ``omega`` may be a float or rational in (0, 1); floats are read through
    their shortest decimal repr, so ``0.01`` is exactly ``1/100``.  The
    factor ``e^eps*`` is rounded up to 12 significant digits.
    """
    om = Fraction(str(omega)) if isinstance(omega, float) else Fraction(omega)
    if not 0 < om < 1:
        raise ValueError(f"omega must lie in (0, 1), got {omega}")

    def apply(steps):
        n = len(steps)
        if n == 0:
            return PrivacyParams(1, om)
        first = steps[0]
        if any(p != first for p in steps):
            raise HypothesisError("the advanced rule needs identical steps")
        if first.k == 1:
            eps_star = Decimal(0)
        else:
            with localcontext() as ctx:
                ctx.prec = 60
                eps = (Decimal(first.k.numerator).ln() - Decimal(first.k.denominator).ln())
            eps_star = advanced_epsilon(eps, n, _decimal(om))
        with localcontext() as ctx:
            ctx.prec = 60
            k_star = Fraction(1) if eps_star == 0 else ceil_significant(eps_star.exp())
        return PrivacyParams(k_star, n * first.delta + om)

    return CompositionRule(f"advanced(omega={om})", apply, True)


# -- n-fold chains ------------------------------------------------------------

@dataclass(frozen=True)
class KernelChain:
    """Stages ``R(0) .. R(n)`` with kernels and per-pair witnesses.

    ``witnesses[i]`` maps each ``(a, b)`` in ``relations[i]`` to witnesses of
    ``left_kernels[i](a) ~ right_kernels[i](b)`` for ``relations[i+1]`` at
    ``step_params[i]``.
    """

    relations: tuple
    left_kernels: tuple
    right_kernels: tuple
    step_params: tuple
    witnesses: tuple

    def __post_init__(self):
        n = len(self.relations) - 1
        if n < 0:
            raise ValueError("a chain needs at least one relation")
        for name in ("left_kernels", "right_kernels", "step_params", "witnesses"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} must have {n} entries")

    @property
    def length(self) -> int:
        return len(self.relations) - 1


def compose_lifted_chain(chain: KernelChain, rule: CompositionRule, start, *,
                         symmetric: bool = False):
    """Witnesses for ``G(a0) ~ H(b0)`` over ``R(n)`` at ``rule(step params)``.

    Both witnesses are obtained by running the stage kernels from
    ``unit((a0, b0))``: the left one follows stored left witnesses, the
    right one stored right witnesses.  Kernels must return proper
    distributions.  Returns ``(judgment, witnesses)``.
    """
    if rule.symmetric_only and not symmetric:
        raise HypothesisError(f"rule {rule.name} needs symmetric witnesses")
    a0, b0 = start
    rels = chain.relations
    if (a0, b0) not in rels[0].pairs:
        raise HypothesisError(f"start pair {start!r} is not related")
    kind = SYM_STAR if symmetric else STAR_KIND
    gs = [_fn(g) for g in chain.left_kernels]
    hs = [_fn(h) for h in chain.right_kernels]
    for i in range(chain.length):
        _check_inner(rels[i], gs[i], hs[i], chain.witnesses[i], chain.step_params[i],
                     rels[i + 1], kind, True)
    left: dict = {(a0, b0): Fraction(1)}
    right: dict = {(a0, b0): Fraction(1)}
    g_dist = unit(rels[0].left_space, a0)
    h_dist = unit(rels[0].right_space, b0)
    for i in range(chain.length):
        nxt = rels[i + 1]
        left = _step(left, True, rels[i], gs[i], hs[i], chain.witnesses[i])
        right = _step(right, False, rels[i], gs[i], hs[i], chain.witnesses[i])
        g_dist = bind(g_dist, gs[i], nxt.left_space)
        h_dist = bind(h_dist, hs[i], nxt.right_space)
    last = rels[-1]
    params = rule(chain.step_params)
    judgment = LiftingJudgment(kind, g_dist, h_dist, last, params)
    return judgment, _witness_pair(left, right, last.left_space, last.right_space)
