from fractions import Fraction as F
import itertools

import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import corpus_judgment, corpus_source
from couplecheck.lang import parse_program
from couplecheck.prhl import instantiate_family, prove_family
from couplecheck.properties import (CERTIFIED, PropertyError, PropertyQuery, check, cond_indep_by_definition,
                                    cond_indep_unfolded, conclude_probability)
from couplecheck.semantics import SubDist
from strategies import straight_programs

HEAD = "program t var x: bool = false var y: bool = false var z: bool = false begin {} end"


def query(body, exprs, kind="uniform", route="oracle", **kw):
    return PropertyQuery(parse_program(HEAD.format(body)), tuple(exprs), kind, route, **kw)


@pytest.mark.parametrize("route", ["oracle", "semantic"])
def test_constant_is_not_uniform(route):
    r = check(query("x := false;", ["x"], route=route))
    assert not r.ok
    if route == "oracle":
        assert r.max_deviation == F(1, 2) and r.counterexample == {"x": False}


@pytest.mark.parametrize("route", ["oracle", "semantic"])
def test_copy_is_dependent(route):
    r = check(query("x <$ flip(1/2); y := x;", ["x", "y"], "indep", route))
    assert not r.ok


@pytest.mark.parametrize("route", ["oracle", "semantic"])
def test_single_variable_is_trivially_independent(route):
    assert check(query("x <$ flip(1/3);", ["x"], "indep", route)).ok


@pytest.mark.parametrize("route", ["oracle", "semantic"])
def test_constant_is_independent_of_anything(route):
    assert check(query("x <$ flip(1/3); y := false;", ["x", "y"], "indep", route)).ok


def test_fair_xor_is_uniform_and_independent():
    body = "x <$ flip(1/2); y <$ flip(1/2); z := x != y;"
    assert check(query(body, ["x", "z"], "indep")).ok
    assert check(query(body, ["x", "z"], "indep-uniform")).ok
    assert not check(query(body, ["x", "y", "z"], "indep")).ok


def test_uniform_where_restricts_the_carrier():
    r = check(PropertyQuery(corpus_source("rejection"), ("x",), where="P(x)", bindings={"size": 6}, fuel=40))
    assert r.ok and r.slack >= F(1, 2) ** 40
    r = check(PropertyQuery(corpus_source("rejection"), ("x",), bindings={"size": 6}, fuel=40))
    assert not r.ok


def test_cond_indep_routes_agree_on_condindep():
    for c in (True, False):
        for route in ("oracle", "semantic"):
            r = check(PropertyQuery(corpus_source("condindep"), ("w", "w'"), "cond-indep", route,
                                    event=f"y = {str(c).lower()}"))
            assert r.ok, (c, route)


def test_cond_indep_zero_event_is_an_error():
    with pytest.raises(PropertyError):
        check(query("x := false;", ["x", "y"], "cond-indep", event="x"))


def test_proof_route_needs_a_script():
    with pytest.raises(PropertyError):
        check(query("x <$ flip(1/2);", ["x"], route="proof"))


def test_pins_must_name_a_meta():
    q = PropertyQuery(corpus_source("condindep"), ("w", "w'"), "cond-indep", "proof", event="y = true",
                      proof=corpus_judgment("condindep"), pins={"nope": True})
    with pytest.raises(PropertyError):
        check(q)


def test_proof_route_with_pins():
    q = PropertyQuery(corpus_source("condindep"), ("w", "w'"), "cond-indep", "proof", event="y = true",
                      proof=corpus_judgment("condindep"), pins={"c": True})
    assert check(q).ok


weights = st.lists(st.integers(0, 3), min_size=8, max_size=8)
marg = st.lists(st.integers(1, 3), min_size=2, max_size=2)


def _dist(ws):
    total = sum(ws)
    return SubDist({k: F(w, total) for k, w in zip(itertools.product((0, 1), repeat=3), ws) if w})


@st.composite
def triple_dists(draw):
    if draw(st.booleans()):
        ws = draw(weights)
        assume(sum(ws))
        return _dist(ws)
    # independent given the last coordinate
    a0, a1, b0, b1, c = (draw(marg) for _ in range(5))
    ws = []
    for x, y, e in itertools.product((0, 1), repeat=3):
        a = (a0, a1)[e][x]
        b = (b0, b1)[e][y]
        ws.append(a * b * c[e] * (1 if e == 0 else 2))
    return _dist(ws)


@settings(max_examples=200, deadline=None)
@given(triple_dists(), st.sampled_from([0, 1]))
def test_unfolding_matches_the_definition(mu, e):
    ev = lambda s: s[2] == e
    assume(mu.pr(ev) > 0)
    fns = [lambda s: s[0], lambda s: s[1]]
    assert cond_indep_by_definition(mu, fns, ev) == cond_indep_unfolded(mu, fns, ev)


@settings(max_examples=40, deadline=None)
@given(straight_programs, st.sampled_from([["x"], ["b"], ["x", "y"], ["x", "b"]]),
       st.sampled_from(["uniform", "indep"]))
def test_oracle_and_semantic_routes_agree(text, exprs, kind):
    p = parse_program(text)
    r1 = check(PropertyQuery(p, tuple(exprs), kind, "oracle"))
    r2 = check(PropertyQuery(p, tuple(exprs), kind, "semantic"))
    assert r1.verdict == r2.verdict


def test_ballot_reflection_conclusion():
    spec, src = corpus_judgment("ballot"), corpus_source("ballot")
    b = {"nA": 3, "nB": 1}
    assert prove_family(src, spec, b).ok
    (j,) = instantiate_family(spec, src, b)
    c = conclude_probability(j)
    assert c.certified and c.relation == "=" and c.lhs == c.rhs and c.slack == 0
    # of the 16 equally likely vote orders only ABAA and BAAA qualify, one on each side
    assert c.lhs == F(1, 16)


def test_conclusion_needs_an_accepted_judgment():
    spec, src = corpus_judgment("ballot"), corpus_source("ballot")
    (j,) = instantiate_family(spec, src, {"nA": 2, "nB": 1})
    with pytest.raises(PropertyError):
        conclude_probability(j, accepted=False)


def test_report_verdict_constant():
    assert check(query("x <$ flip(1/2);", ["x"])).verdict == CERTIFIED
