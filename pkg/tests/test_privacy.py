import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from starlift.dist import SampleSpace, SubDistribution, uniform
from starlift.divergence import PrivacyParams
from starlift.errors import SpaceError
from starlift.gen import random_kernel, random_relation
from starlift.lifting import (STAR_KIND, TWO, LiftingJudgment, two_lifting_feasibility_precheck,
                              validate_witnesses)
from starlift.privacy import (Mechanism, check_dp, dp_via_lifting, randomized_response,
                              renormalized_geometric, successor_relation, tightest_dp_delta,
                              truncated_geometric)
from starlift.relation import FiniteRelation
from starlift.strassen import NotLiftable, synthesize_star_lifting, tightest_delta

from oracles import dp_div_events

BITS = SampleSpace([0, 1])


def constant_mechanism():
    outs = SampleSpace("abc")
    nu = SubDistribution(outs, {"a": F(1, 2), "c": F(1, 2)})
    return Mechanism(BITS, outs, {0: nu, 1: nu}, FiniteRelation.full(BITS, BITS))


def test_constant_kernel_is_private():
    m = constant_mechanism()
    assert check_dp(m, 1, 0).private
    v = dp_via_lifting(m, 1, 0)
    assert v.private
    for (a, b), w in v.witnesses.items():
        # equal outputs at k=1: the witnesses are diagonal couplings
        assert all(x == y for x, y in w.eta_left.mass)
        assert all(x == y for x, y in w.eta_right.mass)
    for k in (1, 2, 5):
        assert tightest_dp_delta(m, k) == 0


def test_randomized_response_quarter():
    rr = randomized_response(F(1, 4))
    assert check_dp(rr, 3, 0).private
    v = check_dp(rr, 3 - F(1, 100), 0)
    assert not v.private and v.pair == (0, 1) and v.event == {0}
    assert v.excess == F(3, 4) - (3 - F(1, 100)) * F(1, 4)
    assert tightest_dp_delta(rr, 1) == F(1, 2)
    assert tightest_dp_delta(rr, 3) == 0


def test_randomized_response_via_lifting():
    rr = randomized_response(F(1, 4))
    v = dp_via_lifting(rr, 3, 0)
    assert v.private and set(v.witnesses) == {(0, 1), (1, 0)}
    eq = FiniteRelation.equality(BITS)
    for (a, b), w in v.witnesses.items():
        j = LiftingJudgment(STAR_KIND, rr(a), rr(b), eq, PrivacyParams(3, 0))
        assert validate_witnesses(j, w).holds
    bad = dp_via_lifting(rr, 3 - F(1, 100), 0)
    assert not bad.private and bad.pair == (0, 1) and bad.event == {0}


def test_randomized_response_half_is_uniform():
    rr = randomized_response(F(1, 2))
    assert rr(0) == rr(1) == uniform(BITS)
    assert check_dp(rr, 1, 0).private


def test_randomized_response_domain():
    with pytest.raises(ValueError):
        randomized_response(F(3, 4))
    with pytest.raises(ValueError):
        randomized_response(0)


def test_truncated_geometric():
    m = truncated_geometric(2, 8)
    for a in m.input_space:
        assert m(a).is_proper
    assert tightest_dp_delta(m, 2) == 0
    assert check_dp(m, 2, 0).private and dp_via_lifting(m, 2, 0).private
    for a, b in m.adjacency.ordered_pairs():
        assert dp_div_events(2, dict(m(a).mass), dict(m(b).mass), m.output_space) == 0
    assert tightest_dp_delta(m, F(3, 2)) > 0
    with pytest.raises(ValueError):
        truncated_geometric(1, 4)


def test_mechanism_validation():
    outs = SampleSpace("ab")
    with pytest.raises(SpaceError):
        Mechanism(BITS, outs, {0: uniform(outs)}, FiniteRelation.full(BITS, BITS))


def geometric_delta(n):
    # each x < n is matched by x + 1 with exactly half its mass; only n is left over
    return F(1, 2 ** (n + 1) - 1)


@pytest.mark.parametrize("n", [4, 8, 16])
def test_geometric_example(n):
    g = renormalized_geometric(n)
    rel = successor_relation(n)
    assert g.is_proper
    res = two_lifting_feasibility_precheck(LiftingJudgment(TWO, g, g, rel, PrivacyParams(2, 1)))
    assert not res.feasible and res.atom == 0
    d = geometric_delta(n)
    assert tightest_delta(g, g, rel, 2) == d
    w = synthesize_star_lifting(g, g, rel, 2, d)
    assert validate_witnesses(LiftingJudgment(STAR_KIND, g, g, rel, PrivacyParams(2, d)), w).holds
    assert isinstance(synthesize_star_lifting(g, g, rel, 2, d * F(99, 100)), NotLiftable)


@given(st.integers(0, 2 ** 32))
def test_checkers_agree_on_random_mechanisms(seed):
    rng = random.Random(seed)
    ins = SampleSpace(range(rng.randint(1, 4)))
    outs = SampleSpace(range(10, 10 + rng.randint(1, 10)))
    m = Mechanism(ins, outs, random_kernel(rng, ins, outs, proper=rng.random() < 0.7),
                  random_relation(rng, ins, ins))
    k = rng.choice((1, F(3, 2), 2, 3))
    delta = rng.choice((F(0), F(1, 8), F(1, 4)))
    a, b = check_dp(m, k, delta), dp_via_lifting(m, k, delta)
    assert a.private == b.private
    if not a.private:
        assert a.pair == b.pair
    eq = FiniteRelation.equality(outs)
    expect = max((tightest_delta(m(x), m(y), eq, k) for x, y in m.adjacency.pairs), default=0)
    assert tightest_dp_delta(m, k) == expect
