"""Approximate couplings with star witnesses: exact checking and synthesis."""
from .composition import (advanced_rule, basic_rule, bind_compose_witnesses, compose_lifted_chain,
                          conjoin_one_sided, mapping_transfer, subset_coupling,
                          transitive_compose, up_to_bad)
from .dist import STAR, JointSubDistribution, SampleSpace, SubDistribution
from .divergence import PrivacyParams, dp_divergence, f_divergence
from .lifting import LiftingJudgment, WitnessPair, validate_witnesses
from .privacy import Mechanism, check_dp, dp_via_lifting, randomized_response
from .relation import FiniteRelation
from .strassen import NotLiftable, sato_holds_bruteforce, synthesize_star_lifting, tightest_delta

__version__ = "0.1.0"

__all__ = [
    "STAR", "SampleSpace", "SubDistribution", "JointSubDistribution", "FiniteRelation",
    "PrivacyParams", "dp_divergence", "f_divergence",
    "LiftingJudgment", "WitnessPair", "validate_witnesses",
    "NotLiftable", "synthesize_star_lifting", "sato_holds_bruteforce", "tightest_delta",
    "transitive_compose", "bind_compose_witnesses", "up_to_bad", "conjoin_one_sided",
    "subset_coupling", "mapping_transfer", "basic_rule", "advanced_rule", "compose_lifted_chain",
    "Mechanism", "check_dp", "dp_via_lifting", "randomized_response",
]
