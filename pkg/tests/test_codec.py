import json
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from starlift import codec
from starlift.dist import STAR, SampleSpace
from starlift.problems import KINDS, ProblemError, canonical, encode, load, schema

from strategies import spaces, subdists


@given(st.fractions(min_value=0, max_value=1000))
def test_rational_round_trip(q):
    s = codec.enc_q(q)
    assert codec.dec_q(s) == q
    p, d = map(int, s.split("/"))
    assert d > 0 and (p, d) == (q.numerator, q.denominator)


def test_rational_format():
    assert codec.enc_q(F(4, 2)) == "2/1"
    assert codec.enc_q(0) == "0/1"
    assert codec.dec_q("6/4") == F(3, 2)
    for bad in ("1/0", "-1/2", "1", "01/2", "1/2 ", 0.5, "1.5/2"):
        with pytest.raises(codec.DecodeError):
            codec.dec_q(bad)


def test_star_token():
    assert codec.enc_atom(STAR) == "@star"
    assert codec.dec_atom("@star") is STAR
    with pytest.raises(codec.DecodeError):
        codec.dec_space(["a", "@star"])
    with pytest.raises(codec.DecodeError):
        codec.dec_atom(True)


def test_space_rejects_duplicates():
    with pytest.raises(codec.DecodeError):
        codec.dec_space(["a", "a"])


@given(st.data())
def test_distribution_round_trip(data):
    space = data.draw(spaces(1, 6))
    mu = data.draw(subdists(space))
    items = json.loads(json.dumps(codec.enc_dist(mu)))
    assert codec.dec_dist(space, items) == mu


def test_duplicate_masses_rejected():
    s = SampleSpace(["a"])
    with pytest.raises(codec.DecodeError):
        codec.dec_dist(s, [["a", "1/4"], ["a", "1/4"]])


def test_dump_is_sorted_with_newline():
    assert codec.dump({"b": 1, "a": [1]}) == '{\n  "a": [\n    1\n  ],\n  "b": 1\n}\n'


def test_schema_lists_every_kind():
    defs = schema()["$defs"]
    assert all(k in defs for k in KINDS)


def test_envelope_errors():
    with pytest.raises(ProblemError):
        load('{"version": "2", "kind": "synthesize", "payload": {}}')
    with pytest.raises(ProblemError):
        load('{"version": "1", "kind": "mystery", "payload": {}}')
    with pytest.raises(ProblemError, match="<input>:1:"):
        load("[1,")


def test_non_canonical_input_is_normalized():
    doc = {"version": "1", "kind": "tightest-delta", "payload": {
        "left_space": [0], "right_space": [0], "mu1": [[0, "2/4"]], "mu2": [[0, "1/2"]],
        "relation": [[0, 0]], "k": "6/3"}}
    text = json.dumps(doc)
    out = canonical(text)
    assert out != text
    assert '"2/1"' in out and '"2/4"' not in out
    assert canonical(out) == out
    assert encode(load(out)) == json.loads(out)
