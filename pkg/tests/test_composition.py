import math
import random
from decimal import Decimal
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from starlift.composition import (KernelChain, advanced_epsilon, advanced_rule, basic_rule,
                                  bind_compose_witnesses, compose_lifted_chain,
                                  conjoin_one_sided, mapping_transfer, subset_coupling,
                                  transitive_compose, up_to_bad)
from starlift.dist import (STAR, JointSubDistribution, SampleSpace, SubDistribution, extend_both,
                           pushforward, uniform, unit)
from starlift.divergence import (HELLINGER, KULLBACK_LEIBLER, STATISTICAL_DISTANCE,
                                 PrivacyParams, f_divergence)
from starlift.errors import HypothesisError, ValidationFailed
from starlift.gen import random_subdistribution, random_subset
from starlift.lifting import (STAR_KIND, LiftingJudgment, WitnessPair, fdiv_star,
                              validate_witnesses)
from starlift.privacy import randomized_response
from starlift.relation import (FiniteRelation, conjoin_left, implies_left, implies_right,
                               pullback)
from starlift.strassen import sato_holds_bruteforce, synthesize_star_lifting

import builders

TWO = SampleSpace([0, 1])


def certified(j):
    return sato_holds_bruteforce(j.mu1, j.mu2, j.relation, j.params.k, j.params.delta).holds


def diag_pair(mu):
    sp = mu.space
    return WitnessPair(JointSubDistribution(sp, sp.extended(), {(x, x): m for x, m in mu.items()}),
                       JointSubDistribution(sp.extended(), sp, {(x, x): m for x, m in mu.items()}))


def star_j(mu1, mu2, rel, k, delta):
    return LiftingJudgment(STAR_KIND, mu1, mu2, rel, PrivacyParams(k, delta))


# -- transitivity -------------------------------------------------------------

def test_transitive_with_identity_keeps_params():
    mu = SubDistribution(TWO, {0: F(2, 3), 1: F(1, 3)})
    r01 = FiniteRelation(TWO, TWO, [(0, 1)])
    j1 = star_j(mu, mu, r01, 2, F(1, 3))
    w1 = synthesize_star_lifting(mu, mu, r01, 2, F(1, 3))
    eq = FiniteRelation.equality(TWO)
    params, rel, j = transitive_compose(j1, w1, star_j(mu, mu, eq, 1, 0), diag_pair(mu))
    assert params == j1.params and rel == r01
    assert certified(j)


def test_transitive_parameter_arithmetic():
    mu = uniform(TWO)
    full = FiniteRelation.full(TWO, TWO)
    w = synthesize_star_lifting(mu, mu, full, 1, 0)
    j1, j2 = star_j(mu, mu, full, 2, F(1, 8)), star_j(mu, mu, full, F(3, 2), F(1, 16))
    params, _, _ = transitive_compose(j1, w, j2, w)
    assert params == PrivacyParams(3, F(1, 4))


def test_transitive_rejects_bad_witness():
    mu = SubDistribution(TWO, {0: F(2, 3), 1: F(1, 3)})
    r01 = FiniteRelation(TWO, TWO, [(0, 1)])
    w = synthesize_star_lifting(mu, mu, r01, 2, F(1, 3))
    j = star_j(mu, mu, r01, 2, F(1, 4))
    with pytest.raises(ValidationFailed):
        transitive_compose(j, w, j, w)


@given(st.integers(0, 2 ** 32))
def test_transitive_certifies(seed):
    rng = random.Random(seed)
    j1, w1, j2, w2 = builders.transitive_case(rng, 4)
    params, rel, j = transitive_compose(j1, w1, j2, w2)
    assert math.isclose(math.log(params.k), math.log(j1.params.k) + math.log(j2.params.k))
    assert params.k == j1.params.k * j2.params.k
    assert certified(j)


# -- sequential composition ---------------------------------------------------

def test_bind_with_dirac_kernels_is_mapping():
    mu = SubDistribution(TWO, {0: F(2, 3), 1: F(1, 3)})
    r01 = FiniteRelation(TWO, TWO, [(0, 1)])
    j = star_j(mu, mu, r01, 2, F(1, 3))
    w = synthesize_star_lifting(mu, mu, r01, 2, F(1, 3))
    out = SampleSpace(["x", "y"])
    f = {0: "x", 1: "y"}
    g = {a: unit(out, f[a]) for a in TWO}
    target = FiniteRelation(out, out, [("x", "y")])
    inner = {(0, 1): WitnessPair(JointSubDistribution(out, out.extended(), {("x", "y"): 1}),
                                 JointSubDistribution(out.extended(), out, {("x", "y"): 1}))}
    j2, w2 = bind_compose_witnesses(j, w, g, g, inner, PrivacyParams(1, 0), target)
    pushed_l = {(f[a], STAR if b is STAR else f[b]): m for (a, b), m in w.eta_left.mass.items()}
    assert dict(w2.eta_left.mass) == pushed_l
    assert j2.params == j.params
    assert validate_witnesses(j2, w2).holds
    assert j2.mu1 == pushforward(f, mu, out)


def test_bind_diagonal_outer_identical_inner():
    mu = uniform(TWO)
    eq = FiniteRelation.equality(TWO)
    j = star_j(mu, mu, eq, 1, 0)
    out = SampleSpace(["u", "v", "w"])
    g = {0: uniform(out), 1: unit(out, "w")}
    target = FiniteRelation.equality(out)
    inner = {(a, a): diag_pair(g[a]) for a in TWO}
    j2, w2 = bind_compose_witnesses(j, diag_pair(mu), g, g, inner, PrivacyParams(1, 0), target)
    assert validate_witnesses(j2, w2).holds
    assert j2.params == PrivacyParams(1, 0)


def test_bind_requires_inner_witness_per_pair():
    mu = uniform(TWO)
    eq = FiniteRelation.equality(TWO)
    g = {a: unit(TWO, a) for a in TWO}
    with pytest.raises(HypothesisError):
        bind_compose_witnesses(star_j(mu, mu, eq, 1, 0), diag_pair(mu), g, g, {},
                               PrivacyParams(1, 0), eq)


@given(st.integers(0, 2 ** 32))
def test_bind_witnesses_validate(seed):
    rng = random.Random(seed)
    j, w, g, h, wits, params, target = builders.bind_case(rng, 3)
    j2, w2 = bind_compose_witnesses(j, w, g, h, wits, params, target)
    assert j2.params == PrivacyParams(j.params.k * params.k, j.params.delta + params.delta)
    assert validate_witnesses(j2, w2).holds
    assert certified(j2)


# -- up to bad and one-sided conjunction ----------------------------------------

def test_up_to_bad_full_theta_keeps_delta():
    mu = uniform(TWO)
    eq = FiniteRelation.equality(TWO)
    j = star_j(mu, mu, implies_left(TWO, eq), 1, 0)
    assert up_to_bad("left", set(TWO), eq, j, diag_pair(mu)).params.delta == 0


def test_up_to_bad_left_charges_bad_mass():
    five = SampleSpace(range(5))
    mu = uniform(five)
    eq = FiniteRelation.equality(five)
    theta = {0, 1, 2, 3}
    j = star_j(mu, mu, implies_left(theta, eq), 1, 0)
    out = up_to_bad("left", theta, eq, j, diag_pair(mu))
    assert out.params.delta == F(1, 5)
    assert certified(out)


def test_up_to_bad_right_scales_by_k():
    ten = SampleSpace(range(10))
    mu = uniform(ten)
    rel = FiniteRelation.equality(ten)
    theta = set(range(9))
    cond = implies_right(theta, rel)
    w = synthesize_star_lifting(mu, mu, cond, 2, 0)
    j = star_j(mu, mu, cond, 2, 0)
    out = up_to_bad("right", theta, rel, j, w)
    assert out.params.delta == F(1, 5)
    assert certified(out)


def test_up_to_bad_rejects_wrong_relation():
    mu = uniform(TWO)
    eq = FiniteRelation.equality(TWO)
    with pytest.raises(HypothesisError):
        up_to_bad("left", {0}, eq, star_j(mu, mu, eq, 1, 0), diag_pair(mu))


def test_conjoin_examples():
    mu = SubDistribution(TWO, {0: 1})
    eq = FiniteRelation.equality(TWO)
    j = star_j(mu, mu, eq, 1, 0)
    assert conjoin_one_sided("left", set(TWO), j, diag_pair(mu)).params == j.params
    out = conjoin_one_sided("left", set(mu.support()), j, diag_pair(mu))
    assert out.params.delta == 0
    assert out.relation == conjoin_left({0}, eq)
    assert certified(out)


@given(st.integers(0, 2 ** 32))
def test_one_sided_rules_certify(seed):
    rng = random.Random(seed)
    side, theta, rel, mu1, mu2 = builders.one_sided_case(rng, 4)
    cond = (implies_left if side == "left" else implies_right)(theta, rel)
    j, w = builders.lifted(rng, mu1, mu2, cond)
    assert certified(up_to_bad(side, theta, rel, j, w))
    j, w = builders.lifted(rng, mu1, mu2, rel)
    assert certified(conjoin_one_sided(side, theta, j, w))


# -- subset coupling ----------------------------------------------------------

def test_subset_coupling_equal_sets():
    four = SampleSpace(range(4))
    mu = SubDistribution(four, {0: F(1, 2), 3: F(1, 4)})
    res = subset_coupling(mu, mu, {0, 1}, {0, 1}, 1, 0)
    assert res.holds and validate_witnesses(star_j(mu, mu, res.relation, 1, 0), res.witnesses).holds


def test_subset_coupling_reports_failed_side():
    mu1 = SubDistribution(TWO, {0: F(3, 4), 1: F(1, 4)})
    mu2 = uniform(TWO)
    res = subset_coupling(mu1, mu2, {0}, {0}, 1, 0)
    assert not res.holds and res.failed == "inside" and res.gap == F(1, 4)
    res = subset_coupling(mu2, mu1, {0}, {0}, 1, 0)
    assert not res.holds and res.failed == "outside" and res.gap == F(1, 4)


@given(st.integers(0, 2 ** 32))
def test_subset_coupling_matches_oracle(seed):
    rng = random.Random(seed)
    a, b = builders.space(rng, "a", 4), builders.space(rng, "b", 4)
    mu1, mu2 = random_subdistribution(rng, a), random_subdistribution(rng, b)
    p1, p2 = random_subset(rng, a), random_subset(rng, b)
    k, delta = rng.choice((1, 2)), rng.choice((F(0), F(1, 8)))
    res = subset_coupling(mu1, mu2, p1, p2, k, delta)
    assert res.holds == sato_holds_bruteforce(mu1, mu2, res.relation, k, delta).holds


# -- mapping transfer ---------------------------------------------------------

def test_mapping_identity_is_unchanged():
    mu = SubDistribution(TWO, {0: F(2, 3), 1: F(1, 3)})
    r01 = FiniteRelation(TWO, TWO, [(0, 1)])
    j = star_j(mu, mu, r01, 2, F(1, 3))
    w = synthesize_star_lifting(mu, mu, r01, 2, F(1, 3))
    ident = {0: 0, 1: 1}
    j2, w2 = mapping_transfer("forward", ident, ident, r01, j, w)
    assert j2 == j and w2 == w


def test_mapping_along_injections_both_ways():
    b = SampleSpace([0, 1, 2])
    eq_b = FiniteRelation.equality(b)
    inj = {0: 0, 1: 1}
    mu = SubDistribution(TWO, {0: F(1, 3), 1: F(2, 3)})
    nu = SubDistribution(TWO, {0: F(1, 2), 1: F(1, 2)})
    s = pullback(inj, inj, eq_b, TWO, TWO)
    assert s == FiniteRelation.equality(TWO)
    for k, delta in ((1, F(1, 6)), (2, 0), (1, 0)):
        src_ok = sato_holds_bruteforce(mu, nu, s, k, delta).holds
        nu1, nu2 = pushforward(inj, mu, b), pushforward(inj, nu, b)
        tgt_ok = sato_holds_bruteforce(nu1, nu2, eq_b, k, delta).holds
        assert src_ok == tgt_ok
        if src_ok:
            j2, w2 = mapping_transfer("forward", inj, inj, eq_b, star_j(mu, nu, s, k, delta))
            assert certified(j2) and validate_witnesses(j2, w2).holds
            j3, w3 = mapping_transfer("backward", inj, inj, eq_b, j2, w2, originals=(mu, nu))
            assert j3.relation == s and validate_witnesses(j3, w3).holds


def fdiv_distance(fdiv, w):
    return f_divergence(fdiv, extend_both(w.eta_left), extend_both(w.eta_right))


def fdiv_judgment(fdiv, mu1, mu2, rel, w):
    """The f-lifting ``w`` certifies at its own distance, or None if that is infinite."""
    d = fdiv_distance(fdiv, w)
    if math.isinf(d):
        return None
    return LiftingJudgment(fdiv_star(fdiv), mu1, mu2, rel, PrivacyParams(1, F(d)))


def test_fdiv_mapping_collapsing_atoms_kl():
    three = SampleSpace([0, 1, 2])
    mu1 = SubDistribution(three, {0: F(1, 4), 1: F(1, 4), 2: F(1, 2)})
    mu2 = SubDistribution(three, {0: F(1, 3), 1: F(1, 6), 2: F(1, 2)})
    eq = FiniteRelation.equality(three)
    w = WitnessPair(JointSubDistribution(three, three.extended(), {(x, x): m for x, m in mu1.items()}),
                    JointSubDistribution(three.extended(), three, {(x, x): m for x, m in mu2.items()}))
    j = fdiv_judgment(KULLBACK_LEIBLER, mu1, mu2, eq, w)
    assert validate_witnesses(j, w).holds
    coarse = SampleSpace(["lo", "hi"])
    f = {0: "lo", 1: "lo", 2: "hi"}
    eq_c = FiniteRelation.equality(coarse)
    # forward: data processing can only shrink the divergence
    fine = LiftingJudgment(j.kind, mu1, mu2, pullback(f, f, eq_c, three, three), j.params)
    jf, wf = mapping_transfer("forward", f, f, eq_c, fine, w)
    assert validate_witnesses(jf, wf).holds
    # backward from the coarse witnesses: divergence is preserved exactly
    jb, wb = mapping_transfer("backward", f, f, eq_c, jf, wf, originals=(mu1, mu2))
    assert fdiv_distance(KULLBACK_LEIBLER, wf) <= fdiv_distance(KULLBACK_LEIBLER, w) + 1e-9
    assert abs(fdiv_distance(KULLBACK_LEIBLER, wf) - fdiv_distance(KULLBACK_LEIBLER, wb)) <= 1e-9
    assert validate_witnesses(jb, wb).holds


# -- composition rules --------------------------------------------------------

def test_basic_rule():
    out = basic_rule()([PrivacyParams(2, F(1, 8)), PrivacyParams(F(3, 2), F(1, 16))])
    assert out == PrivacyParams(3, F(3, 16))


def test_advanced_rule_degenerate():
    out = advanced_rule(F(1, 10))([PrivacyParams(1, F(1, 8))])
    assert out == PrivacyParams(1, F(1, 8) + F(1, 10))


def test_advanced_rule_reference_point():
    eps_star = advanced_epsilon(Decimal("0.1"), 100, Decimal("0.01"))
    # sqrt(200 ln 100) * 0.1 + 100 * 0.1 * (e^0.1 - 1)
    ref = math.sqrt(200 * math.log(100)) * 0.1 + 10 * (math.exp(0.1) - 1)
    assert abs(float(eps_star) - ref) < 1e-12
    assert abs(float(eps_star) - 4.08657) < 1e-4
    step = PrivacyParams.from_epsilon(0.1, 0)
    out = advanced_rule(0.01)([step] * 100)
    assert out.delta == F(1, 100)
    assert abs(math.log(out.k) - 4.08657) < 1e-4


def test_advanced_rule_needs_identical_steps():
    with pytest.raises(HypothesisError):
        advanced_rule(0.5)([PrivacyParams(2), PrivacyParams(3)])
    with pytest.raises(ValueError):
        advanced_rule(1.5)


# -- chains -------------------------------------------------------------------

def rr_chain(n, p=F(1, 4)):
    rr = randomized_response(p)
    bits = rr.input_space
    eq = FiniteRelation.equality(bits)
    full = FiniteRelation.full(bits, bits)
    # every stage reruns randomized response on the previous output
    kern = {x: rr(x) for x in bits}
    rels = (full,) + (eq,) * n
    wits = []
    for i in range(n):
        stage = {}
        for a, b in rels[i].ordered_pairs():
            stage[a, b] = synthesize_star_lifting(kern[a], kern[b], eq, 3, 0)
        wits.append(stage)
    return KernelChain(rels, (kern,) * n, (kern,) * n, (PrivacyParams(3, 0),) * n, tuple(wits))


def test_single_step_chain_returns_stored_witnesses():
    chain = rr_chain(1)
    j, w = compose_lifted_chain(chain, basic_rule(), (0, 1))
    stored = chain.witnesses[0][0, 1]
    assert w == stored
    assert j.params == PrivacyParams(3, 0)


def test_two_step_randomized_response_chain():
    chain = rr_chain(2)
    j, w = compose_lifted_chain(chain, basic_rule(), (0, 1))
    assert j.params == PrivacyParams(9, 0)
    assert validate_witnesses(j, w).holds and certified(j)


def test_symmetric_only_rule_needs_symmetric_flag():
    with pytest.raises(HypothesisError):
        compose_lifted_chain(rr_chain(1), advanced_rule(0.5), (0, 1))


def test_chain_rejects_unrelated_start():
    c = rr_chain(1)
    eq = FiniteRelation.equality(TWO)
    narrowed = KernelChain((eq,) + c.relations[1:], c.left_kernels, c.right_kernels,
                           c.step_params, c.witnesses)
    with pytest.raises(HypothesisError):
        compose_lifted_chain(narrowed, basic_rule(), (0, 1))


@given(st.integers(0, 2 ** 32))
def test_chain_certifies(seed):
    rng = random.Random(seed)
    chain, start = builders.chain_case(rng)
    j, w = compose_lifted_chain(chain, basic_rule(), start)
    assert validate_witnesses(j, w).holds
    assert certified(j)


@given(st.integers(0, 2 ** 32))
def test_dirac_chain_matches_bind(seed):
    rng = random.Random(seed)
    chain, start = builders.chain_case(rng, max_len=1)
    a0, b0 = start
    rel0 = chain.relations[0]
    mu1, mu2 = unit(rel0.left_space, a0), unit(rel0.right_space, b0)
    j = star_j(mu1, mu2, rel0, 1, 0)
    w = WitnessPair(JointSubDistribution(rel0.left_space, rel0.right_space.extended(), {start: 1}),
                    JointSubDistribution(rel0.left_space.extended(), rel0.right_space, {start: 1}))
    jb, wb = bind_compose_witnesses(j, w, chain.left_kernels[0], chain.right_kernels[0],
                                    chain.witnesses[0], chain.step_params[0], chain.relations[1])
    jc, wc = compose_lifted_chain(chain, basic_rule(), start)
    assert wb == wc and jb.mu1 == jc.mu1 and jb.mu2 == jc.mu2


# -- f-divergence sequential composition --------------------------------------

@given(st.integers(0, 2 ** 32), st.sampled_from([STATISTICAL_DISTANCE, HELLINGER, KULLBACK_LEIBLER]))
def test_fdiv_bind_adds_deltas(seed, fdiv):
    rng = random.Random(seed)
    j, w, g, h, wits, _, target = builders.bind_case(rng, 3)
    outer = fdiv_judgment(fdiv, j.mu1, j.mu2, j.relation, w)
    inner_d = max((fdiv_distance(fdiv, iw) for iw in wits.values()), default=0.0)
    if outer is None or math.isinf(inner_d):
        return
    jo, wo = bind_compose_witnesses(outer, w, g, h, wits, PrivacyParams(1, F(inner_d)), target)
    assert validate_witnesses(jo, wo).holds
