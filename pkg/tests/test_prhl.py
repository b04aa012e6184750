from fractions import Fraction as F

import pytest

from conftest import CORPUS, corpus_judgment, corpus_source, typed
from couplecheck.prhl import (ScriptError, check_proof, ground, instantiate_family, parse_judgment, prove_family,
                              validate_semantic)
from couplecheck.prhl.judgment import parse_script

TWO_BOOLS = "program s var x: bool = false begin {} end"


def one(body_left, body_right, pre, post):
    return ground(typed(TWO_BOOLS.format(body_left)), typed(TWO_BOOLS.format(body_right)), pre, post)


def test_skip_rule():
    j = one("skip;", "skip;", "x{1} = x{2}", "x{1} = x{2}")
    assert check_proof(j, parse_script("(skip)")).accepted
    j = one("skip;", "skip;", "x{1} = x{2}", "x{1} != x{2}")
    v = check_proof(j, parse_script("(skip)"))
    assert not v.accepted and v.error.rule == "judgment" and "precondition" in v.error.reason


def test_rand_with_negation_bijection():
    j = one("x <$ flip(1/2);", "x <$ flip(1/2);", "true", "x{1} = !x{2}")
    assert check_proof(j, parse_script('(rand :f "fun v -> !v")')).accepted
    j = one("x <$ flip(1/3);", "x <$ flip(1/3);", "true", "x{1} = !x{2}")
    v = check_proof(j, parse_script('(rand :f "fun v -> !v")'))
    assert not v.accepted and v.error.rule == "rand"


def test_uniformizer_proof_accepted():
    spec = corpus_judgment("uniformizer")
    for p in ("1/3", "1/2", "2/3"):
        fam = prove_family(corpus_source("uniformizer"), spec, {"p": F(p)}, fuel=60)
        assert fam.ok and len(fam.verdicts) == 1
        # the while rule records the loop's truncated mass
        assert fam.residual == (F(p) ** 2 + (1 - F(p)) ** 2) ** 60


def test_weakened_invariant_rejected():
    text = (CORPUS / "uniformizer.prf").read_text()
    start = text.index(':inv "') + len(':inv "')
    weak = text[:start] + "true" + text[text.index('"', start):]
    fam = prove_family(corpus_source("uniformizer"), parse_judgment(weak), {"p": F(1, 3)}, fuel=60)
    assert not fam.ok and fam.rejected[0].error.counterexample is not None


def test_judgment_without_proof():
    spec = parse_judgment('(judgment :pre "true" :post "true")')
    with pytest.raises(ScriptError):
        prove_family(corpus_source("uniformizer"), spec)
    with pytest.raises(ScriptError):
        parse_judgment('(judgment :bogus 1)')


def test_validate_semantic_examples():
    assert validate_semantic(one("x <$ flip(1/2);", "x <$ flip(1/2);", "true", "x{1} = !x{2}")).holds
    v = validate_semantic(one("x <$ flip(1/2);", "x := false;", "true", "x{1} = x{2}"))
    assert not v.holds and v.failure is not None


@pytest.mark.parametrize("name, bindings, pins, count", [
    ("uniformizer", {}, None, 1),
    ("ballot", {"nA": 2, "nB": 1}, None, 1),
    ("pairwise", {"n": 2}, None, 4),          # a, a2 : bool
    ("condindep", {}, None, 8),               # a, b, c : bool
    ("condindep", {}, {"c": True}, 4),
    ("rejection", {"size": 6}, None, 9),      # a1, a2 in {0, 2, 4}
    ("walk", {"n": 3}, None, 9),              # a, b : zmod(3)
    ("kwise", {"p": 3, "k": 2, "n": 3}, None, 81),   # four metas over zmod(3)
])
def test_family_sizes(name, bindings, pins, count):
    js = list(instantiate_family(corpus_judgment(name), corpus_source(name), bindings, only=pins))
    assert len(js) == count
    assert len({j.instance for j in js}) == count


@pytest.mark.parametrize("name, bindings, fuel", [
    ("uniformizer", {"p": F(1, 3)}, 60),
    ("ballot", {"nA": 2, "nB": 1}, 64),
    ("rejection", {"size": 6}, 40),
    ("pairwise", {"n": 2}, 64),
    ("condindep", {}, 64),
    ("walk", {"n": 3}, 64),
    ("kwise", {"p": 3, "k": 2, "n": 3}, 64),
])
def test_accepted_instances_hold_semantically(name, bindings, fuel):
    """Soundness on the corpus: whatever the checker accepts, max-flow confirms."""
    spec, src = corpus_judgment(name), corpus_source(name)
    fam = prove_family(src, spec, bindings, fuel=fuel)
    assert fam.ok
    for j in instantiate_family(spec, src, bindings):
        assert validate_semantic(j, fuel).holds, j.instance


def test_checker_is_deterministic():
    spec, src = corpus_judgment("rejection"), corpus_source("rejection")
    a = prove_family(src, spec, {"size": 6}, fuel=40)
    b = prove_family(src, spec, {"size": 6}, fuel=40)
    assert [str(v) for v in a.verdicts] == [str(v) for v in b.verdicts]
    assert [[(o.path, o.rule) for o in v.log] for v in a.verdicts] == \
           [[(o.path, o.rule) for o in v.log] for v in b.verdicts]
