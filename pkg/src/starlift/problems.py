"""Problem files: schema validation, decoding to domain objects, canonical re-encoding."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any

from jsonschema import Draft202012Validator

from . import codec as c
from .divergence import BUILTIN, PrivacyParams
from .errors import StarliftError
from .lifting import LiftingJudgment, LiftingKind, WitnessPair, fdiv_star
from .privacy import Mechanism, randomized_response, truncated_geometric

VERSION = "1"
KINDS = ("lifting-check", "synthesize", "tightest-delta", "divergence", "dp-check",
         "compose", "subset-coupling")


class ProblemError(ValueError):
    """The problem file is unreadable, fails the schema, or is inconsistent."""


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("starlift").joinpath("schemas/problem.schema.json").read_text("utf-8")
    return json.loads(text)


def _validator() -> Draft202012Validator:
    return Draft202012Validator(schema())


@dataclass(frozen=True)
class Problem:
    kind: str
    data: dict


def parse_text(text: str, source: str = "<input>") -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{source}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc


def check_schema(doc) -> None:
    errors = sorted(_validator().iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors[:10]:
            where = "/".join(map(str, e.absolute_path)) or "(root)"
            lines.append(f"{where}: {e.message}")
        raise ProblemError("schema violation:\n  " + "\n  ".join(lines))


def _instance(p: dict):
    left, right = c.dec_space(p["left_space"]), c.dec_space(p["right_space"])
    return (left, right, c.dec_dist(left, p["mu1"]), c.dec_dist(right, p["mu2"]),
            c.dec_relation(left, right, p["relation"]))


def _enc_instance(d: dict) -> dict:
    return {"left_space": c.enc_space(d["relation"].left_space),
            "right_space": c.enc_space(d["relation"].right_space),
            "mu1": c.enc_dist(d["mu1"]), "mu2": c.enc_dist(d["mu2"]),
            "relation": c.enc_relation(d["relation"])}


def _lifting_kind(p: dict) -> LiftingKind:
    tag = p["lifting"]
    if tag == "fdiv-star":
        if "fdiv" not in p:
            raise ProblemError("lifting 'fdiv-star' needs an 'fdiv' field")
        return fdiv_star(BUILTIN[p["fdiv"]])
    if "fdiv" in p:
        raise ProblemError("'fdiv' only applies to lifting 'fdiv-star'")
    return LiftingKind(tag)


def _decode_payload(kind: str, p: dict) -> dict:
    if kind in ("lifting-check", "synthesize", "tightest-delta"):
        left, right, mu1, mu2, rel = _instance(p)
        d = {"mu1": mu1, "mu2": mu2, "relation": rel, "k": c.dec_q(p["k"])}
        if kind == "tightest-delta":
            return d
        d["delta"] = c.dec_q(p["delta"])
        if kind == "synthesize":
            return d
        lk = _lifting_kind(p)
        params = PrivacyParams(d["k"], d["delta"])
        d["judgment"] = LiftingJudgment(lk, mu1, mu2, rel, params)
        w = p["witness"]
        if lk.single_witness:
            if not isinstance(w, list):
                raise ProblemError(f"lifting {lk} takes a single joint as witness")
            d["witness"] = c.dec_joint(left, right, w)
        else:
            if not isinstance(w, dict):
                raise ProblemError(f"lifting {lk} takes an eta_left/eta_right witness pair")
            if lk.star_shaped:
                d["witness"] = WitnessPair(c.dec_joint(left, right.extended(), w["eta_left"]),
                                           c.dec_joint(left.extended(), right, w["eta_right"]))
            else:
                d["witness"] = WitnessPair(c.dec_joint(left, right, w["eta_left"]),
                                           c.dec_joint(left, right, w["eta_right"]))
        return d
    if kind == "divergence":
        space = c.dec_space(p["space"])
        d = {"mu1": c.dec_dist(space, p["mu1"]), "mu2": c.dec_dist(space, p["mu2"])}
        if "k" in p:
            d["k"] = c.dec_q(p["k"])
        if "bound" in p:
            b = p["bound"]
            d["bound"] = c.dec_q(b) if isinstance(b, str) else float(b)
        return d
    if kind == "dp-check":
        d = {"k": c.dec_q(p["k"]), "delta": c.dec_q(p["delta"])}
        if "builtin" in p:
            b = p["builtin"]
            d["builtin"] = dict(b)
            if b["name"] == "randomized-response":
                d["mechanism"] = randomized_response(c.dec_q(b["p"]))
            else:
                d["mechanism"] = truncated_geometric(c.dec_q(b["k_step"]), b["n"])
        else:
            m = p["mechanism"]
            ins, outs = c.dec_space(m["input_space"]), c.dec_space(m["output_space"])
            kernel = {}
            for a, dist in m["kernel"]:
                a = c.dec_atom(a)
                if a in kernel:
                    raise ProblemError(f"kernel lists input {a!r} twice")
                kernel[a] = c.dec_dist(outs, dist)
            d["mechanism"] = Mechanism(ins, outs, kernel, c.dec_relation(ins, ins, m["adjacency"]))
        return d
    if kind == "compose":
        steps = []
        for s in p["steps"]:
            step = {"delta": c.dec_q(s["delta"])}
            if "k" in s:
                step["k"] = c.dec_q(s["k"])
            else:
                step["epsilon"] = float(s["epsilon"])
            steps.append(step)
        d = {"steps": steps}
        if "target" in p:
            d["target"] = PrivacyParams(c.dec_q(p["target"]["k"]), c.dec_q(p["target"]["delta"]))
        return d
    if kind == "subset-coupling":
        left, right = c.dec_space(p["left_space"]), c.dec_space(p["right_space"])
        return {"mu1": c.dec_dist(left, p["mu1"]), "mu2": c.dec_dist(right, p["mu2"]),
                "p1": c.dec_subset(left, p["p1"]), "p2": c.dec_subset(right, p["p2"]),
                "k": c.dec_q(p["k"]), "delta": c.dec_q(p["delta"])}
    raise ProblemError(f"unknown problem kind {kind!r}")


def decode(doc: Any) -> Problem:
    """Schema-check ``doc`` and turn it into domain objects."""
    check_schema(doc)
    try:
        return Problem(doc["kind"], _decode_payload(doc["kind"], doc["payload"]))
    except (StarliftError, ValueError, KeyError) as exc:
        if isinstance(exc, ProblemError):
            raise
        raise ProblemError(str(exc)) from exc


def load(text: str, source: str = "<input>") -> Problem:
    return decode(parse_text(text, source))


def _enc_mechanism(m: Mechanism) -> dict:
    return {"input_space": c.enc_space(m.input_space),
            "output_space": c.enc_space(m.output_space),
            "kernel": [[c.enc_atom(a), c.enc_dist(m(a))] for a in m.input_space],
            "adjacency": c.enc_relation(m.adjacency)}


def encode_payload(kind: str, d: dict) -> dict:
    if kind in ("lifting-check", "synthesize", "tightest-delta"):
        out = _enc_instance(d)
        out["k"] = c.enc_q(d["k"])
        if kind == "tightest-delta":
            return out
        out["delta"] = c.enc_q(d["delta"])
        if kind == "synthesize":
            return out
        lk = d["judgment"].kind
        out["lifting"] = lk.tag
        if lk.fdiv is not None:
            out["fdiv"] = lk.fdiv.name
        w = d["witness"]
        if isinstance(w, WitnessPair):
            out["witness"] = {"eta_left": c.enc_joint(w.eta_left),
                              "eta_right": c.enc_joint(w.eta_right)}
        else:
            out["witness"] = c.enc_joint(w)
        return out
    if kind == "divergence":
        out = {"space": c.enc_space(d["mu1"].space),
               "mu1": c.enc_dist(d["mu1"]), "mu2": c.enc_dist(d["mu2"])}
        if "k" in d:
            out["k"] = c.enc_q(d["k"])
        if "bound" in d:
            b = d["bound"]
            out["bound"] = c.enc_q(b) if isinstance(b, Fraction) else b
        return out
    if kind == "dp-check":
        out = {"k": c.enc_q(d["k"]), "delta": c.enc_q(d["delta"])}
        if "builtin" in d:
            out["builtin"] = d["builtin"]
        else:
            out["mechanism"] = _enc_mechanism(d["mechanism"])
        return out
    if kind == "compose":
        steps = []
        for s in d["steps"]:
            step = {"delta": c.enc_q(s["delta"])}
            if "k" in s:
                step["k"] = c.enc_q(s["k"])
            else:
                step["epsilon"] = s["epsilon"]
            steps.append(step)
        out = {"steps": steps}
        if "target" in d:
            out["target"] = {"k": c.enc_q(d["target"].k), "delta": c.enc_q(d["target"].delta)}
        return out
    if kind == "subset-coupling":
        return {"left_space": c.enc_space(d["mu1"].space),
                "right_space": c.enc_space(d["mu2"].space),
                "mu1": c.enc_dist(d["mu1"]), "mu2": c.enc_dist(d["mu2"]),
                "p1": c.enc_subset(d["mu1"].space, d["p1"]),
                "p2": c.enc_subset(d["mu2"].space, d["p2"]),
                "k": c.enc_q(d["k"]), "delta": c.enc_q(d["delta"])}
    raise ProblemError(f"unknown problem kind {kind!r}")


def encode(problem: Problem) -> dict:
    return {"version": VERSION, "kind": problem.kind,
            "payload": encode_payload(problem.kind, problem.data)}


def canonical(text: str) -> str:
    """Parse and re-serialize; canonical files come back byte-identical."""
    return c.dump(encode(load(text)))
