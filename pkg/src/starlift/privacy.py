"""Finite mechanisms and differential-privacy checks.

A mechanism is ``(eps, delta)``-private for an adjacency relation when the
DP divergence at ``k = e^eps`` between the outputs of every adjacent pair
is at most ``delta``.  The same verdict can be reached by asking for a
star lifting of the equality relation between those outputs.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .dist import ZERO, SampleSpace, SubDistribution, as_fraction
from .divergence import PrivacyParams, dp_divergence, dp_divergence_event
from .errors import SpaceError
from .lifting import WitnessPair
from .relation import FiniteRelation, symmetric_closure
from .strassen import NotLiftable, synthesize_star_lifting

__all__ = [
    "Mechanism", "DPVerdict", "check_dp", "dp_via_lifting", "tightest_dp_delta",
    "randomized_response", "truncated_geometric", "symmetric_closure",
    "renormalized_geometric", "successor_relation",
]


@dataclass(frozen=True)
class Mechanism:
    input_space: SampleSpace
    output_space: SampleSpace
    kernel: Mapping = field(repr=False)
    adjacency: FiniteRelation

    def __post_init__(self):
        kernel = dict(self.kernel)
        for a in self.input_space:
            if a not in kernel:
                raise SpaceError(f"kernel is undefined at input {a!r}")
            if not isinstance(kernel[a], SubDistribution):
                raise SpaceError(f"kernel output at {a!r} is not a SubDistribution")
            if kernel[a].space != self.output_space:
                raise SpaceError(f"kernel output at {a!r} lives over the wrong space")
        extra = set(kernel) - set(self.input_space)
        if extra:
            raise SpaceError(f"kernel has inputs outside the input space: {sorted(map(repr, extra))}")
        if (self.adjacency.left_space != self.input_space
                or self.adjacency.right_space != self.input_space):
            raise SpaceError("adjacency must relate the input space to itself")
        object.__setattr__(self, "kernel", kernel)

    def __call__(self, a) -> SubDistribution:
        return self.kernel[a]


@dataclass(frozen=True)
class DPVerdict:
    """Outcome of a privacy check.

    For a violation, ``pair`` is the first offending adjacent pair (in
    adjacency order) and ``event`` an output set exhibiting it.  A lifting
    check that succeeds stores the per-pair ``witnesses``.
    """

    private: bool
    params: PrivacyParams
    pair: Optional[tuple] = None
    event: Optional[frozenset] = None
    excess: Optional[Fraction] = None
    witnesses: Optional[dict] = None

    def __bool__(self):
        return self.private


def _params(k, delta) -> PrivacyParams:
    return k if isinstance(k, PrivacyParams) else PrivacyParams(k, delta)


def check_dp(m: Mechanism, k, delta=0) -> DPVerdict:
    """Divergence check over every adjacent pair, exact."""
    p = _params(k, delta)
    for a, b in m.adjacency.ordered_pairs():
        d = dp_divergence(p.k, m(a), m(b))
        if d > p.delta:
            return DPVerdict(False, p, (a, b), dp_divergence_event(p.k, m(a), m(b)), d - p.delta)
    return DPVerdict(True, p)


def dp_via_lifting(m: Mechanism, k, delta=0) -> DPVerdict:
    """Privacy through star liftings of the equality relation on outputs.

    On failure, ``event`` is the violating output set returned by the
    synthesis engine.
    """
    p = _params(k, delta)
    eq = FiniteRelation.equality(m.output_space)
    found: dict[Any, WitnessPair] = {}
    for a, b in m.adjacency.ordered_pairs():
        got = synthesize_star_lifting(m(a), m(b), eq, p.k, p.delta)
        if isinstance(got, NotLiftable):
            return DPVerdict(False, p, (a, b), got.subset, got.violation)
        found[a, b] = got
    return DPVerdict(True, p, witnesses=found)


def tightest_dp_delta(m: Mechanism, k) -> Fraction:
    """Least ``delta`` with the mechanism ``(ln k, delta)``-private."""
    k = as_fraction(k)
    return max((dp_divergence(k, m(a), m(b)) for a, b in m.adjacency.pairs), default=ZERO)


# -- stock mechanisms ---------------------------------------------------------

def randomized_response(p) -> Mechanism:
    """Report the input bit, flipped with probability ``p`` in ``(0, 1/2]``."""
    p = as_fraction(p)
    if not 0 < p <= Fraction(1, 2):
        raise ValueError(f"flip probability must lie in (0, 1/2], got {p}")
    bits = SampleSpace([0, 1])
    kernel = {x: SubDistribution(bits, {x: 1 - p, 1 - x: p}) for x in bits}
    return Mechanism(bits, bits, kernel, FiniteRelation(bits, bits, [(0, 1), (1, 0)]))


def truncated_geometric(k_step, n: int) -> Mechanism:
    """Two-sided geometric noise around the input, clamped into ``{0..n}``.

    With ``r = 1/k_step`` the output ``y`` gets ``c r^|y-a|`` in the
    interior (``c = (1-r)/(1+r)``) and each boundary atom collects its whole
    tail, ``r^a/(1+r)`` at 0 and ``r^(n-a)/(1+r)`` at ``n``.  Neighbouring
    inputs then differ pointwise by a factor of at most ``k_step``.
    """
    k_step = as_fraction(k_step)
    if k_step <= 1:
        raise ValueError(f"k_step must exceed 1, got {k_step}")
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    space = SampleSpace(range(n + 1))
    r = 1 / k_step
    c = (1 - r) / (1 + r)
    kernel = {}
    for a in space:
        if n == 0:
            kernel[a] = SubDistribution(space, {0: 1})
            continue
        mass = {y: c * r ** abs(y - a) for y in range(1, n)}
        mass[0] = r ** a / (1 + r)
        mass[n] = r ** (n - a) / (1 + r)
        kernel[a] = SubDistribution(space, mass)
    adjacency = FiniteRelation.from_predicate(space, space, lambda a, b: abs(a - b) == 1)
    return Mechanism(space, space, kernel, adjacency)


def renormalized_geometric(n: int) -> SubDistribution:
    """``x -> 2^-(x+1)`` on ``{0..n}``, rescaled to total mass one."""
    space = SampleSpace(range(n + 1))
    total = 1 - Fraction(1, 2 ** (n + 1))
    return SubDistribution(space, {x: Fraction(1, 2 ** (x + 1)) / total for x in space})


def successor_relation(n: int) -> FiniteRelation:
    """``{(x, x + 1)}`` on ``{0..n}``."""
    space = SampleSpace(range(n + 1))
    return FiniteRelation(space, space, ((x, x + 1) for x in range(n)))
