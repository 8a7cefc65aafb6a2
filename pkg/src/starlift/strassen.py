"""Witness synthesis for star liftings by max flow, plus the subset oracle.

Network layout (``k`` the multiplicative factor, ``omega = |mu2| + delta/k``)::

    source -> a_top        capacity mu1(a) / k            a in A
    source -> STAR_top     capacity omega - |mu1| / k
    a_top  -> b_bot        unbounded when a R b, a = STAR or b = STAR
    b_bot  -> sink         capacity mu2(b)                b in B
    STAR_bot -> sink       capacity delta / k

A flow of value ``omega`` saturates every source and sink edge, and its
middle values yield the witnesses.  When the maximum is smaller, the
source side of a minimum cut names a violating subset of ``A``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .dist import STAR, ZERO, JointSubDistribution, SubDistribution, as_fraction
from .errors import NegativeCapacity, OracleCapExceeded, SpaceError
from .flow import INF, Flow, FlowNetwork, max_flow, max_flow_with_cut
from .lifting import WitnessPair
from .relation import FiniteRelation, image

SOURCE = ("source",)
SINK = ("sink",)
DEFAULT_ORACLE_CAP = 20


def top(a):
    return ("top", a)


def bot(b):
    return ("bot", b)


@dataclass(frozen=True)
class NotLiftable:
    """No star lifting exists; ``subset`` violates the witness-free condition.

    ``violation`` is ``mu1[X] - k * mu2[R(X)] - delta``, which is positive.
    """

    subset: frozenset
    violation: Fraction

    def __bool__(self):
        return False


@dataclass(frozen=True)
class SatoResult:
    holds: bool
    subset: frozenset | None = None
    violation: Fraction | None = None

    def __bool__(self):
        return self.holds


def _check_instance(mu1: SubDistribution, mu2: SubDistribution, rel: FiniteRelation, k, delta):
    if mu1.space != rel.left_space or mu2.space != rel.right_space:
        raise SpaceError("distributions must live over the relation's spaces")
    k, delta = as_fraction(k), as_fraction(delta)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    return k, delta


def violation_of(mu1, mu2, rel, k, delta, subset) -> Fraction:
    """``mu1[X] - k * mu2[R(X)] - delta``."""
    subset = frozenset(subset)
    img = image(rel, subset)
    return (sum((mu1[a] for a in subset), ZERO)
            - as_fraction(k) * sum((mu2[b] for b in img), ZERO) - as_fraction(delta))


def build_strassen_network(mu1: SubDistribution, mu2: SubDistribution, rel: FiniteRelation,
                           k, delta) -> FlowNetwork:
    k, delta = _check_instance(mu1, mu2, rel, k, delta)
    a_star, b_star = rel.left_space.extended(), rel.right_space.extended()
    omega = mu2.total + delta / k
    star_cap = omega - mu1.total / k
    if star_cap < 0:
        full = frozenset(rel.left_space)
        raise NegativeCapacity(
            f"|mu1| / k = {mu1.total / k} exceeds omega = {omega}",
            full)
    nodes = (SOURCE, *(top(a) for a in a_star), *(bot(b) for b in b_star), SINK)
    cap: dict = {}
    for a in rel.left_space:
        cap[SOURCE, top(a)] = mu1[a] / k
    cap[SOURCE, top(STAR)] = star_cap
    for a in a_star:
        for b in b_star:
            if a is STAR or b is STAR or (a, b) in rel.pairs:
                cap[top(a), bot(b)] = INF
    for b in rel.right_space:
        cap[bot(b), SINK] = mu2[b]
    cap[bot(STAR), SINK] = delta / k
    return FlowNetwork(nodes, cap, SOURCE, SINK, omega)


def witnesses_from_flow(flow: Flow, mu1, mu2, rel: FiniteRelation, k) -> WitnessPair:
    """``eta_left = k * f`` on ``A x B*`` and ``eta_right = f`` on ``A* x B``."""
    k = as_fraction(k)
    a_sp, b_sp = rel.left_space, rel.right_space
    left, right = {}, {}
    for a in a_sp.extended():
        for b in b_sp.extended():
            x = flow(top(a), bot(b))
            if x <= 0:
                continue
            if a is not STAR:
                left[a, b] = k * x
            if b is not STAR:
                right[a, b] = x
    return WitnessPair(JointSubDistribution(a_sp, b_sp.extended(), left),
                       JointSubDistribution(a_sp.extended(), b_sp, right))


def synthesize_star_lifting(mu1: SubDistribution, mu2: SubDistribution, rel: FiniteRelation,
                            k, delta) -> Union[WitnessPair, NotLiftable]:
    """Star witnesses at ``(k, delta)``, or a violating subset when none exist.

    The subset is read off the largest source side of a minimum cut: the
    left atoms (star excluded) whose top node cannot reach the sink in the
    final residual graph.  Any minimum cut's left part maximizes
    ``mu1[X] - k*mu2[R(X)]`` among non-empty ``X``, so it violates whenever
    the flow falls short of ``omega``.
    """
    k, delta = _check_instance(mu1, mu2, rel, k, delta)
    try:
        net = build_strassen_network(mu1, mu2, rel, k, delta)
    except NegativeCapacity as exc:
        return NotLiftable(exc.subset, violation_of(mu1, mu2, rel, k, delta, exc.subset))
    flow, _, source_side = max_flow_with_cut(net)
    if flow.mass == net.omega:
        return witnesses_from_flow(flow, mu1, mu2, rel, k)
    subset = frozenset(a for a in rel.left_space if top(a) in source_side)
    return NotLiftable(subset, violation_of(mu1, mu2, rel, k, delta, subset))


def sato_holds_bruteforce(mu1: SubDistribution, mu2: SubDistribution, rel: FiniteRelation,
                          k, delta, *, cap: int = DEFAULT_ORACLE_CAP) -> SatoResult:
    """Check ``mu1[X] <= k * mu2[R(X)] + delta`` for every ``X`` in ``supp(mu1)``.

    Returns the maximizing violator; among equal violations, the one whose
    sorted index tuple (in space order) is lexicographically least.
    """
    k, delta = _check_instance(mu1, mu2, rel, k, delta)
    atoms = mu1.support()
    n = len(atoms)
    if n > cap:
        raise OracleCapExceeded(f"support has {n} atoms, oracle cap is {cap}")
    right = tuple(rel.right_space)
    r_index = {b: i for i, b in enumerate(right)}
    succ_mask = []
    for a in atoms:
        m = 0
        for b in rel.successors(a):
            m |= 1 << r_index[b]
        succ_mask.append(m)
    m1 = [mu1[a] for a in atoms]
    m2 = [mu2[b] for b in right]

    img_mass: dict = {0: ZERO}

    def mass_of(mask: int) -> Fraction:
        got = img_mass.get(mask)
        if got is None:
            low = mask & -mask
            got = mass_of(mask ^ low) + m2[low.bit_length() - 1]
            img_mass[mask] = got
        return got

    size = 1 << n
    sums = [ZERO] * size
    imgs = [0] * size
    best, best_key = None, None
    for mask in range(1, size):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        sums[mask] = sums[rest] + m1[i]
        imgs[mask] = imgs[rest] | succ_mask[i]
        v = sums[mask] - k * mass_of(imgs[mask]) - delta
        if v <= 0 or (best is not None and v < best):
            continue
        key = tuple(j for j in range(n) if mask >> j & 1)
        if best is None or v > best or key < best_key:
            best, best_key = v, key
    if best is None:
        return SatoResult(True)
    return SatoResult(False, frozenset(atoms[j] for j in best_key), best)


def tightest_delta(mu1: SubDistribution, mu2: SubDistribution, rel: FiniteRelation, k) -> Fraction:
    """Least ``delta`` for which a star lifting at ``(k, delta)`` exists.

    Equals ``|mu1|`` minus the max flow of the network ``source -> a``
    (``mu1(a)``), ``a -> b`` unbounded for ``a R b``, ``b -> sink``
    (``k * mu2(b)``); no star nodes.
    """
    k, _ = _check_instance(mu1, mu2, rel, k, 0)
    nodes = (SOURCE, *(top(a) for a in rel.left_space),
             *(bot(b) for b in rel.right_space), SINK)
    cap: dict = {}
    for a in rel.left_space:
        cap[SOURCE, top(a)] = mu1[a]
    for a, b in rel.ordered_pairs():
        cap[top(a), bot(b)] = INF
    for b in rel.right_space:
        cap[bot(b), SINK] = k * mu2[b]
    return mu1.total - max_flow(FlowNetwork(nodes, cap, SOURCE, SINK)).mass
