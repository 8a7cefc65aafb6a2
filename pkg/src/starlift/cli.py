"""Command-line front end.

Exit codes: 0 the property holds, 1 it fails (the report carries a
counterexample), 2 the input or the invocation is unusable.
"""
from __future__ import annotations

import argparse
import json
import math
import random
import sys
from fractions import Fraction

from . import codec as c
from .composition import advanced_rule, basic_rule, subset_coupling
from .dist import SampleSpace
from .divergence import (BUILTIN, DEFAULT_TOLERANCE, PrivacyParams, dp_divergence,
                         dp_divergence_event, f_divergence)
from .errors import OracleCapExceeded, StarliftError
from .gen import random_instance, random_kernel, random_relation, random_subdistribution, random_subset
from .lifting import validate_witnesses
from .privacy import Mechanism, check_dp, dp_via_lifting
from .problems import KINDS, Problem, ProblemError, encode, load
from .relation import FiniteRelation
from .strassen import NotLiftable, sato_holds_bruteforce, synthesize_star_lifting, tightest_delta

COMMAND_KIND = {
    "check": "lifting-check",
    "synthesize": "synthesize",
    "tightest-delta": "tightest-delta",
    "divergence": "divergence",
    "dp-check": "dp-check",
    "compose": "compose",
    "subset-coupling": "subset-coupling",
}

HOLDS, FAILS, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class OracleDisagreement(Exception):
    pass


def _params_block(k: Fraction, delta=None, epsilon=None) -> dict:
    out = {"k": c.enc_q(k),
           "epsilon": epsilon if epsilon is not None else math.log(k.numerator) - math.log(k.denominator)}
    if delta is not None:
        out["delta"] = c.enc_q(delta)
    return out


def _enc_item(x):
    if isinstance(x, tuple):
        return [c.enc_atom(y) for y in x]
    return c.enc_atom(x)


def _enc_set(items) -> list:
    encoded = [_enc_item(x) for x in items]
    return sorted(encoded, key=lambda v: json.dumps(v, sort_keys=True))


def _enc_number(x):
    return c.enc_q(x) if isinstance(x, Fraction) else c.enc_float(x)


def _witness_block(w) -> dict:
    return {"eta_left": c.enc_joint(w.eta_left), "eta_right": c.enc_joint(w.eta_right)}


def _verdict(ok: bool) -> str:
    return "holds" if ok else "fails"


def _oracle(args, mu1, mu2, rel, k, delta):
    if args.oracle == "off":
        return None
    return sato_holds_bruteforce(mu1, mu2, rel, k, delta)


# -- commands -----------------------------------------------------------------

def cmd_check(args, d: dict):
    j, w = d["judgment"], d["witness"]
    rep = validate_witnesses(j, w, tol=args.tolerance)
    report = {
        "verdict": _verdict(rep.holds),
        "lifting": str(j.kind),
        "parameters": _params_block(j.params.k, j.params.delta),
        "distance": _enc_number(rep.distance),
        "slack": _enc_number(rep.slack),
        "failed_condition": rep.failed_condition,
        "certificate": ({"witnesses_valid": True} if rep.holds else
                        {"counterexample": _enc_set(rep.counterexample or ())}),
    }
    if j.kind.tag != "fdiv-star":
        sato = _oracle(args, j.mu1, j.mu2, j.relation, j.params.k, j.params.delta)
        if sato is not None:
            report["oracle"] = {"holds": sato.holds}
            if rep.holds and not sato.holds:
                raise OracleDisagreement("valid witnesses but the subset oracle finds a violation")
    return (HOLDS if rep.holds else FAILS), report


def cmd_synthesize(args, d: dict):
    mu1, mu2, rel, k, delta = d["mu1"], d["mu2"], d["relation"], d["k"], d["delta"]
    got = synthesize_star_lifting(mu1, mu2, rel, k, delta)
    ok = not isinstance(got, NotLiftable)
    report = {"verdict": _verdict(ok), "parameters": _params_block(k, delta)}
    if ok:
        report["certificate"] = {"witnesses": _witness_block(got)}
    else:
        report["certificate"] = {"violating_subset": c.enc_subset(rel.left_space, got.subset),
                                 "violation": c.enc_q(got.violation)}
    sato = _oracle(args, mu1, mu2, rel, k, delta)
    if sato is not None:
        report["oracle"] = {"holds": sato.holds}
        if sato.holds != ok:
            raise OracleDisagreement("synthesis and the subset oracle disagree")
    return (HOLDS if ok else FAILS), report


def cmd_tightest(args, d: dict):
    mu1, mu2, rel, k = d["mu1"], d["mu2"], d["relation"], d["k"]
    value = tightest_delta(mu1, mu2, rel, k)
    report = {"verdict": "holds", "parameters": _params_block(k),
              "tightest_delta": c.enc_q(value), "certificate": {"tightest_delta": c.enc_q(value)}}
    sato = _oracle(args, mu1, mu2, rel, k, 0)
    if sato is not None:
        expect = Fraction(0) if sato.holds else sato.violation
        report["oracle"] = {"tightest_delta": c.enc_q(expect)}
        if expect != value:
            raise OracleDisagreement("max-flow and the subset oracle disagree on the tightest delta")
    return HOLDS, report


def cmd_divergence(args, d: dict):
    mu1, mu2 = d["mu1"], d["mu2"]
    report: dict = {"divergence": args.kind}
    if args.kind == "dp":
        if "k" not in d:
            raise UsageError("--kind dp needs a 'k' field in the payload")
        value = dp_divergence(d["k"], mu1, mu2)
        report["parameters"] = _params_block(d["k"])
        report["value"] = c.enc_q(value)
        report["certificate"] = {"event": c.enc_subset(mu1.space, dp_divergence_event(d["k"], mu1, mu2))}
    else:
        value = f_divergence(BUILTIN[args.kind], mu1, mu2)
        report["value"] = c.enc_float(value)
        report["certificate"] = {}
    ok = True
    if "bound" in d:
        bound = d["bound"]
        if isinstance(value, Fraction) and isinstance(bound, Fraction):
            ok = value <= bound
        else:
            ok = not math.isinf(value) and float(value) <= float(bound) + args.tolerance
        report["bound"] = _enc_number(bound)
    report["verdict"] = _verdict(ok)
    return (HOLDS if ok else FAILS), report


def cmd_dp_check(args, d: dict):
    m: Mechanism = d["mechanism"]
    params = PrivacyParams(d["k"], d["delta"])
    verdict = dp_via_lifting(m, params) if args.via == "lifting" else check_dp(m, params)
    report = {"verdict": _verdict(verdict.private), "via": args.via,
              "parameters": _params_block(params.k, params.delta)}
    if verdict.private:
        cert: dict = {}
        if verdict.witnesses is not None:
            cert["witnesses"] = [[c.enc_atom(a), c.enc_atom(b), _witness_block(w)]
                                 for (a, b), w in verdict.witnesses.items()]
        report["certificate"] = cert
    else:
        a, b = verdict.pair
        report["certificate"] = {"pair": [c.enc_atom(a), c.enc_atom(b)],
                                 "event": c.enc_subset(m.output_space, verdict.event),
                                 "excess": c.enc_q(verdict.excess)}
    if args.oracle == "on":
        eq = FiniteRelation.equality(m.output_space)
        oracle_ok = all(sato_holds_bruteforce(m(a), m(b), eq, params.k, params.delta).holds
                        for a, b in m.adjacency.ordered_pairs())
        report["oracle"] = {"holds": oracle_ok}
        if oracle_ok != verdict.private:
            raise OracleDisagreement("privacy verdict and the subset oracle disagree")
    return (HOLDS if verdict.private else FAILS), report


def cmd_compose(args, d: dict):
    if args.rule == "advanced":
        if args.omega is None:
            raise UsageError("--rule advanced needs --omega")
        rule = advanced_rule(args.omega)
    else:
        rule = basic_rule()
    steps = [PrivacyParams.from_epsilon(s["epsilon"], s["delta"]) if "epsilon" in s
             else PrivacyParams(s["k"], s["delta"]) for s in d["steps"]]
    try:
        out = rule(steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = {"rule": rule.name, "symmetric_only": rule.symmetric_only, "steps": len(steps),
              "parameters": _params_block(out.k, out.delta),
              "certificate": {"k": c.enc_q(out.k), "delta": c.enc_q(out.delta)}}
    ok = True
    if "target" in d:
        t = d["target"]
        ok = out.k <= t.k and out.delta <= t.delta
        report["target"] = {"k": c.enc_q(t.k), "delta": c.enc_q(t.delta)}
    report["verdict"] = _verdict(ok)
    return (HOLDS if ok else FAILS), report


def cmd_subset(args, d: dict):
    mu1, mu2, p1, p2, k, delta = (d[x] for x in ("mu1", "mu2", "p1", "p2", "k", "delta"))
    res = subset_coupling(mu1, mu2, p1, p2, k, delta)
    report = {"verdict": _verdict(res.holds), "parameters": _params_block(k, delta),
              "relation": c.enc_relation(res.relation)}
    if res.holds:
        report["certificate"] = {"witnesses": _witness_block(res.witnesses)}
    else:
        report["certificate"] = {"failed_inequality": res.failed, "gap": c.enc_q(res.gap)}
    sato = _oracle(args, mu1, mu2, res.relation, k, delta)
    if sato is not None:
        report["oracle"] = {"holds": sato.holds}
        if sato.holds != res.holds:
            raise OracleDisagreement("subset inequalities and the subset oracle disagree")
    return (HOLDS if res.holds else FAILS), report


HANDLERS = {
    "check": cmd_check,
    "synthesize": cmd_synthesize,
    "tightest-delta": cmd_tightest,
    "divergence": cmd_divergence,
    "dp-check": cmd_dp_check,
    "compose": cmd_compose,
    "subset-coupling": cmd_subset,
}


# -- problem generation -------------------------------------------------------

def generate(kind: str, seed: int) -> Problem:
    """A random problem of ``kind``; the same seed gives the same file."""
    rng = random.Random(seed)
    if kind in ("synthesize", "tightest-delta"):
        mu1, mu2, rel, k, delta = random_instance(rng, max_left=4, max_right=4)
        data = {"mu1": mu1, "mu2": mu2, "relation": rel, "k": k}
        if kind == "synthesize":
            data["delta"] = delta
        return Problem(kind, data)
    if kind == "divergence":
        space = SampleSpace(range(rng.randint(1, 5)))
        return Problem(kind, {"mu1": random_subdistribution(rng, space),
                              "mu2": random_subdistribution(rng, space),
                              "k": rng.choice((Fraction(1), Fraction(2)))})
    if kind == "subset-coupling":
        left = SampleSpace(range(rng.randint(1, 4)))
        right = SampleSpace(range(10, 10 + rng.randint(1, 4)))
        return Problem(kind, {"mu1": random_subdistribution(rng, left),
                              "mu2": random_subdistribution(rng, right),
                              "p1": random_subset(rng, left), "p2": random_subset(rng, right),
                              "k": rng.choice((Fraction(1), Fraction(2))),
                              "delta": rng.choice((Fraction(0), Fraction(1, 8)))})
    if kind == "dp-check":
        ins = SampleSpace(range(rng.randint(2, 3)))
        outs = SampleSpace(range(10, 10 + rng.randint(1, 4)))
        adj = random_relation(rng, ins, ins)
        mech = Mechanism(ins, outs, random_kernel(rng, ins, outs), adj)
        return Problem(kind, {"mechanism": mech, "k": Fraction(2), "delta": Fraction(1, 8)})
    raise UsageError(f"cannot generate problems of kind {kind!r}")


# -- driver -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--oracle", choices=("on", "off"), default="on",
                        help="cross-check against the brute-force subset oracle (default on)")
    common.add_argument("--seed", type=int, default=0, help="seed for random generators")
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE,
                        help="tolerance for floating-point comparisons")

    parser = argparse.ArgumentParser(
        prog="starlift",
        description="Check, synthesize, and compose approximate liftings exactly.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name != "generate":
            p.add_argument("input", nargs="?", default="-", help="problem file (default stdin)")
        return p

    add("check", "validate given witnesses")
    add("synthesize", "build witnesses or a violating subset")
    add("tightest-delta", "least delta admitting a lifting")
    p = add("divergence", "DP or f-divergence between two distributions")
    p.add_argument("--kind", choices=("dp", "sd", "kl", "hellinger"), default="dp")
    p = add("dp-check", "differential privacy of a finite mechanism")
    p.add_argument("--via", choices=("divergence", "lifting"), default="divergence")
    p = add("compose", "compose per-step privacy parameters")
    p.add_argument("--rule", choices=("basic", "advanced"), default="basic")
    p.add_argument("--omega", type=float, default=None)
    add("subset-coupling", "decide a subset coupling")
    add("canonical", "re-serialize a problem file in canonical form")
    p = add("generate", "emit a random problem file")
    p.add_argument("--kind", choices=KINDS, default="synthesize")
    return parser


def _read(path: str) -> tuple[str, str]:
    if path == "-":
        return sys.stdin.read(), "<stdin>"
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read(), path
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else HOLDS
    try:
        if args.command == "generate":
            sys.stdout.write(c.dump(encode(generate(args.kind, args.seed))))
            return HOLDS
        text, source = _read(args.input)
        problem = load(text, source)
        if args.command == "canonical":
            sys.stdout.write(c.dump(encode(problem)))
            return HOLDS
        want = COMMAND_KIND[args.command]
        if problem.kind != want:
            raise UsageError(f"command {args.command!r} expects a {want!r} problem, "
                             f"got {problem.kind!r}")
        code, report = HANDLERS[args.command](args, problem.data)
    except (ProblemError, UsageError) as exc:
        print(f"starlift: error: {exc}", file=sys.stderr)
        return USAGE
    except OracleCapExceeded as exc:
        print(f"starlift: error: {exc}; rerun with --oracle off to skip the brute-force check",
              file=sys.stderr)
        return USAGE
    except OracleDisagreement as exc:
        print(f"starlift: internal error: {exc}", file=sys.stderr)
        return USAGE
    except (StarliftError, ValueError) as exc:
        print(f"starlift: error: {exc}", file=sys.stderr)
        return USAGE
    report = {"command": args.command, "kind": problem.kind, **report}
    sys.stdout.write(c.dump(report))
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
