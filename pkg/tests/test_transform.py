from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from conftest import corpus_source, typed
from couplecheck.lang import format_program, parse_expr, parse_program, typecheck
from couplecheck.lang import ast as A
from couplecheck.semantics import product, run
from couplecheck.transform import (SwapError, project_state, self_compose, self_compose_state, semantic_equiv,
                                   split_program, swap, while_split)
from strategies import programs


def test_self_compose_renames_every_variable():
    p = corpus_source("condindep")
    p3 = self_compose(p, 3)
    names = [v.name for v in p3.vars]
    assert names[:5] == ["x@1", "y@1", "z@1", "w@1", "w'@1"] and len(names) == 15
    assert p3.params == p.params
    copies = A.flatten(p3.body)
    reads = [A.var_footprint(s)[0] for s in copies]
    tags = [{n.split("@")[1] for n in r if "@" in n} for r in reads]
    assert all(len(t) == 1 for t in tags)
    with pytest.raises(ValueError):
        self_compose(p, 0)


def test_state_helpers():
    m = self_compose_state({"x": 1, "b": True}, 2)
    assert m == {"x@1": 1, "b@1": True, "x@2": 1, "b@2": True}
    assert project_state(m, 2) == {"x": 1, "b": True}


@settings(max_examples=50, deadline=None)
@given(programs)
def test_self_composition_runs_the_product(text):
    p = parse_program(text)
    mu = run(typecheck(p, {}), 8)
    mu2 = run(typecheck(self_compose(p, 2), {}), 8)
    assert mu2 == product(mu, mu).map(lambda ab: ab[0] + ab[1])


@settings(max_examples=50, deadline=None)
@given(programs, st.integers(0, 2), st.integers(0, 2))
def test_self_composition_preserves_event_probabilities(text, a, b):
    p = parse_program(text)
    tp, tp2 = typecheck(p, {}), typecheck(self_compose(p, 2), {})
    mu, mu2 = run(tp, 8), run(tp2, 8)
    x, n = tp.layout.names.index("x"), tp.layout.visible
    e1 = lambda s: s[x] == a
    e2 = lambda s: s[x] == b
    assert mu2.pr(lambda s: e1(s[:n]) and e2(s[n:])) == mu.pr(e1) * mu.pr(e2)


def test_swap():
    s1 = A.Sample("x", A.Bernoulli(A.Lit(F(1, 2))))
    s2 = A.Assign("y", A.Lit(1))
    assert swap(s1, s2) == A.Seq(s2, s1)
    with pytest.raises(SwapError):
        swap(s1, A.Assign("y", A.Name("x")))
    # constants are shared but never block the swap
    assert swap(A.Assign("x", A.Name("n")), A.Assign("y", A.Name("n")), variables={"x", "y"})


def test_while_split_shape():
    w = A.While(A.Name("b"), A.Skip())
    s = while_split(w, A.Lit(False), group="g")
    assert s.first.group == "g" and s.second.group == "g+"
    assert s.first.cond == A.Binary("&&", A.Name("b"), A.Lit(False), ty=None)
    with pytest.raises(TypeError):
        while_split(A.Skip(), A.Lit(True))


@pytest.mark.parametrize("e", ["false", "true", "x < 2"])
def test_split_preserves_semantics_at_equal_fuel(e):
    p = parse_program("""program s
var x: range(4) = 0
var b: bool = true
begin
  while b { x <$ uniform(range(4)); b <$ flip(1/2); }
end""")
    q = split_program(p, 1, parse_expr(e))
    for fuel in (1, 3, 10):
        assert run(typecheck(q, {}), fuel) == run(typecheck(p, {}), fuel)


def test_split_program_on_the_walk():
    p = corpus_source("walk")
    q = split_program(p, 5, parse_expr("!((a - f) <= (l - f))"), consts={"a": 1})
    assert run(typecheck(q, {"n": 3}), 30) == run(typecheck(p, {"n": 3}), 30)
    with pytest.raises(ValueError):
        split_program(p, 1, parse_expr("true"))


def test_semantic_equiv():
    tp = typed("program e var x: bool = false var y: bool = false begin "
               "x <$ flip(1/3); y <$ flip(1/2); x := true; y := x; end")
    a, b, c, d = A.flatten(tp.body)
    assert semantic_equiv(tp, A.Seq(a, b), A.Seq(b, a)) == (True, None)
    ok, witness = semantic_equiv(tp, A.Seq(c, d), A.Seq(d, c))
    assert not ok and witness == {"x": False, "y": False}


def test_selfcompose_output_parses():
    p = corpus_source("uniformizer")
    text = format_program(self_compose(p, 2))
    again = parse_program(text)
    assert A.flatten(again.body) == A.flatten(self_compose(p, 2).body)
    assert again.vars == self_compose(p, 2).vars
    assert run(typecheck(again, {"p": F(1, 2)}), 20).weight > 0
