from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import corpus_source, typed
from couplecheck.lang import (ParseError, TypeCheckError, format_program, parse_expr, parse_program,
                              parse_type, typecheck)
from couplecheck.lang import ast as A
from couplecheck.lang.desugar import desugar
from couplecheck.lang.typecheck import resolve_type
from couplecheck.lang.types import BoolT, EnumT, ListT, RangeT, TupleT, ZModT, domain_size, enumerate_type
from couplecheck.semantics import run
from strategies import programs

CORPUS_NAMES = ["uniformizer", "walk", "ballot", "pairwise", "kwise", "condindep", "rejection"]


def body_of(text):
    return parse_program(f"program t var x: bool = false var y: bool = false begin {text} end").body


def test_sample_flip_parses_to_bernoulli():
    assert body_of("x <$ flip(1/2);") == A.Sample("x", A.Bernoulli(A.Lit(Fraction(1, 2))))


def test_uniformizer_shape():
    stmts = A.flatten(corpus_source("uniformizer").body)
    assert [type(s) for s in stmts] == [A.Assign, A.Assign, A.While]
    assert stmts[0].var == "x" and stmts[1].var == "y"
    assert stmts[2].cond == A.Binary("=", A.Name("x"), A.Name("y"))


def test_syntax_error_points_at_semicolon():
    with pytest.raises(ParseError) as e:
        parse_program("program p\nvar x: bool = false\nbegin\n  x := ;\nend")
    assert (e.value.line, e.value.col) == (4, 8)


def test_duplicate_declaration():
    with pytest.raises(ParseError, match="duplicate"):
        parse_program("program p var x: bool = false var x: bool = true begin skip; end")


def test_for_loops_are_preserved_by_the_parser():
    p = corpus_source("pairwise")
    assert any(isinstance(s, A.For) for s in A.flatten(p.body))


def test_pairwise_typechecks_with_bool_outputs():
    tp = typecheck(corpus_source("pairwise"), {"n": 3})
    z = tp.layout.type_of("z")
    assert isinstance(z, TupleT) and len(z.elems) == 8 and all(isinstance(t, BoolT) for t in z.elems)


@pytest.mark.parametrize("body, msg", [
    ("x := 3;", "type mismatch"),
    ("x <$ flip(5/4);", "outside"),
    ("while 1 { skip; }", "bool"),
    ("q := true;", "unbound"),
])
def test_type_errors(body, msg):
    with pytest.raises(TypeCheckError, match=msg):
        typed(f"program p var x: bool = false begin {body} end")


def test_uniform_set_duplicates_rejected():
    with pytest.raises(TypeCheckError, match="duplicate"):
        typed("program p var x: range(3) = 0 begin x <$ uniform{1, 1}; end")


def test_enumerate_types():
    assert enumerate_type(BoolT()) == [False, True]
    assert enumerate_type(ZModT(3)) == [0, 1, 2]
    lists = enumerate_type(ListT(2, BoolT()))
    assert len(lists) == 7 == domain_size(ListT(2, BoolT()))
    assert lists[0] == () and set(lists) == {(), (False,), (True,), (False, False), (False, True),
                                             (True, False), (True, True)}


@pytest.mark.parametrize("t", [BoolT(), RangeT(4), ZModT(5), EnumT(("A", "B")), ListT(3, RangeT(2)),
                               TupleT((BoolT(), ZModT(3)))])
def test_enumeration_is_exact(t):
    vals = enumerate_type(t)
    assert len(vals) == len(set(vals)) == domain_size(t)


def test_type_syntax_resolves_against_params():
    tp = typecheck(corpus_source("walk"), {"n": 4})
    assert resolve_type(parse_type("zmod(n)"), tp.scope()) == ZModT(4)


def test_var_footprint():
    s = body_of("x := y;")
    assert A.var_footprint(s) == ({"x", "y"}, {"x"})
    assert A.var_footprint(A.Skip()) == (set(), set())
    w = corpus_source("condindep").body
    last = A.flatten(w)[3]
    assert A.var_footprint(last) == ({"w", "x", "y"}, {"w"})


def test_desugar_for():
    s = parse_program("program p var i: range(4) = 0 var x: bool = false begin "
                      "for i = 1 to 2 { x := !x; } end").body
    d = desugar(s)
    assert isinstance(d, A.Seq) and d.first == A.Assign("i", A.Lit(1))
    assert isinstance(d.second, A.While)
    assert desugar(body_of("x := y;")) == body_of("x := y;")


def test_desugared_double_loop_agrees_with_hand_written_while():
    src = corpus_source("kwise")
    hand = parse_program("""program kw
param p: range(8) = 3
param k: range(4) = 2
param n: range(6) = 2
var i: range(k + 1) = 0
var m: range(n + 1) = 0
var j: range(k + 1) = 0
var a: array(k, zmod(p)) = repeat(0, k)
var x: array(n, zmod(p)) = repeat(0, n)
begin
  i := 0;
  while i <= k - 1 { a[i] <$ uniform(zmod(p)); i := i + 1; }
  m := 0;
  while m <= n - 1 {
    x[m] := 0;
    j := 0;
    while j <= k - 1 { x[m] := x[m] + a[j] * pow(m, j); j := j + 1; }
    m := m + 1;
  }
end""")
    b = {"p": 3, "k": 2, "n": 2}
    assert run(typecheck(src, b)).mass == run(typecheck(hand, b)).mass


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_corpus_round_trip(name):
    p = corpus_source(name)
    assert parse_program(format_program(p)) == p


@settings(max_examples=100, deadline=None)
@given(programs)
def test_parse_print_round_trip(text):
    p = parse_program(text)
    printed = format_program(p)
    assert parse_program(printed) == p
    assert format_program(parse_program(printed)) == printed


@pytest.mark.parametrize("text", ["x{1} = y{2} + 1", "forall v : bool, v ==> x{1}", "(x && !y){2}",
                                  "if a then b else c", "l ++ [1, 2]", "f(x, y)[0].1"])
def test_expression_round_trip(text):
    from couplecheck.lang import format_expr
    e = parse_expr(text)
    assert parse_expr(format_expr(e)) == e
