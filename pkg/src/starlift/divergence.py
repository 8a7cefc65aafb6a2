"""DP divergence (exact) and f-divergences (floating point).

The DP divergence at multiplicative factor ``k`` is computed through the
pointwise formula ``sum max(mu1(a) - k*mu2(a), 0)``; the event attaining
the supremum is the set where ``mu1 > k*mu2``.

f-divergences weight by the second argument:
``sum mu2(a) * f(mu1(a) / mu2(a))``, where a point with ``mu2(a) = 0``
and ``mu1(a) = x > 0`` contributes ``x * L_f`` and a point where both
vanish contributes nothing.
"""
from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction

from .dist import ZERO, JointSubDistribution, SubDistribution, as_fraction
from .errors import SpaceError

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PrivacyParams:
    """Multiplicative factor ``k = e^eps`` and additive slack ``delta``."""

    k: Fraction
    delta: Fraction

    def __init__(self, k=1, delta=0):
        k, delta = as_fraction(k), as_fraction(delta)
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if delta < 0:
            raise ValueError(f"delta must be >= 0, got {delta}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "delta", delta)

    @property
    def epsilon(self) -> float:
        """``ln k``, for display only."""
        return math.log(self.k.numerator) - math.log(self.k.denominator)

    @classmethod
    def from_epsilon(cls, epsilon, delta=0, digits: int = 12) -> "PrivacyParams":
        return cls(k_from_epsilon(epsilon, digits), delta)


def ceil_significant(value: Decimal, digits: int = 12) -> Fraction:
    """Round a positive Decimal up to ``digits`` significant digits."""
    if value <= 0:
        raise ValueError("expected a positive value")
    exponent = value.adjusted() - digits + 1
    quantum = Decimal(1).scaleb(exponent)
    with localcontext() as ctx:
        ctx.prec = max(60, digits + 10)
        rounded = value.quantize(quantum, rounding=ROUND_CEILING)
    return Fraction(rounded)


def k_from_epsilon(epsilon, digits: int = 12) -> Fraction:
    """``e^epsilon`` rounded *up* to a rational with ``digits`` significant digits.

    Rounding up keeps every ``<= e^eps * ...`` check sound.  The
    exponential is evaluated in 60-digit decimal arithmetic on the exact
    value of ``epsilon`` (floats are taken at their exact binary value).
    """
    eps = Decimal(epsilon) if not isinstance(epsilon, Fraction) else (
        Decimal(epsilon.numerator) / Decimal(epsilon.denominator))
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    if eps == 0:
        return Fraction(1)
    with localcontext() as ctx:
        ctx.prec = 60
        value = eps.exp()
    return max(Fraction(1), ceil_significant(value, digits))


def _paired_masses(mu1, mu2):
    """Align two (joint) sub-distributions over the same space."""
    if isinstance(mu1, SubDistribution) and isinstance(mu2, SubDistribution):
        if mu1.space != mu2.space:
            raise SpaceError("divergence needs both distributions over the same space")
    elif isinstance(mu1, JointSubDistribution) and isinstance(mu2, JointSubDistribution):
        if mu1.left_space != mu2.left_space or mu1.right_space != mu2.right_space:
            raise SpaceError("divergence needs both joints over the same product space")
    else:
        raise SpaceError("cannot compare a plain and a joint sub-distribution")
    keys = list(mu1.mass)
    keys += [x for x in mu2.mass if x not in mu1.mass]
    return [(x, mu1.mass.get(x, ZERO), mu2.mass.get(x, ZERO)) for x in keys]


def dp_divergence(k, mu1, mu2) -> Fraction:
    """``sup_E mu1[E] - k * mu2[E]``, exactly."""
    k = as_fraction(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return sum((max(p - k * q, ZERO) for _, p, q in _paired_masses(mu1, mu2)), ZERO)


def dp_divergence_event(k, mu1, mu2) -> frozenset:
    """The event attaining the DP divergence: atoms where ``mu1 > k*mu2``."""
    k = as_fraction(k)
    return frozenset(x for x, p, q in _paired_masses(mu1, mu2) if p > k * q)


def dp_as_f_divergence(k, mu1, mu2) -> Fraction:
    """The DP divergence evaluated in f-divergence form.

    Uses ``f(t) = max(t - k, 0)`` with ``f(0) = 0`` and ``L_f = 1``, all in
    exact arithmetic; agrees with :func:`dp_divergence`.
    """
    k = as_fraction(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    total = ZERO
    for _, p, q in _paired_masses(mu1, mu2):
        if q:
            total += q * max(p / q - k, ZERO)
        else:
            total += p
    return total


class FKind(enum.Enum):
    STATISTICAL_DISTANCE = "sd"
    KULLBACK_LEIBLER = "kl"
    HELLINGER = "hellinger"
    CUSTOM = "custom"


@dataclass(frozen=True)
class FDivergence:
    """A convex generator ``f`` with ``f(1) = 0`` plus its boundary values.

    ``f_at_zero`` is ``f(0)`` and ``l_limit`` is ``lim_{t->0+} t*f(1/t)``,
    which may be ``math.inf``.
    """

    kind: FKind
    f: Callable[[float], float] = field(compare=False)
    f_at_zero: float
    l_limit: float
    name: str = ""

    def __call__(self, t: float) -> float:
        return self.f(t)


def _sd(t):
    return 0.5 * abs(t - 1.0)


def _kl(t):
    if t == 0:
        return 1.0
    return t * math.log(t) - t + 1.0


def _hellinger(t):
    return 0.5 * (math.sqrt(t) - 1.0) ** 2


STATISTICAL_DISTANCE = FDivergence(FKind.STATISTICAL_DISTANCE, _sd, 0.5, 0.5, "sd")
KULLBACK_LEIBLER = FDivergence(FKind.KULLBACK_LEIBLER, _kl, 1.0, math.inf, "kl")
HELLINGER = FDivergence(FKind.HELLINGER, _hellinger, 0.5, 0.5, "hellinger")

BUILTIN = {d.name: d for d in (STATISTICAL_DISTANCE, KULLBACK_LEIBLER, HELLINGER)}


def custom_divergence(f: Callable[[float], float], l_limit: float, *, name: str = "custom",
                      tol: float = DEFAULT_TOLERANCE) -> FDivergence:
    """Wrap a user generator after linting it.

    The lint checks ``f(1) = 0``, non-negativity, and midpoint convexity
    on a 64-point grid over (0, 8].  It is a sanity check, not a proof.
    """
    if abs(f(1.0)) > tol:
        raise ValueError(f"f(1) = {f(1.0)!r}, expected 0")
    grid = [8.0 * (i + 1) / 64 for i in range(64)]
    values = [f(t) for t in grid]
    if any(v < -tol for v in values):
        raise ValueError("f takes negative values on the lint grid")
    for i in range(len(grid)):
        for j in range(i + 2, len(grid), 2):
            mid = (i + j) // 2
            if values[mid] > 0.5 * (values[i] + values[j]) + tol:
                raise ValueError(f"f fails midpoint convexity between {grid[i]} and {grid[j]}")
    return FDivergence(FKind.CUSTOM, f, float(f(0.0)), float(l_limit), name)


def f_divergence(fdiv: FDivergence, mu1, mu2) -> float:
    """Second-argument-weighted f-divergence; ``math.inf`` is a legal result."""
    total = 0.0
    for _, p, q in _paired_masses(mu1, mu2):
        if q:
            total += float(q) * fdiv.f(float(p / q))
        elif p:
            if math.isinf(fdiv.l_limit):
                return math.inf
            total += float(p) * fdiv.l_limit
    return total
