from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from conftest import corpus_source, typed
from couplecheck.lang import parse_program, typecheck
from couplecheck.lang import ast as A
from couplecheck.semantics import (SubDist, bind, check_lossless, dirac, eval_dist, marginal, product, run,
                                   uniform)
from strategies import distributions, programs


kernels = st.sampled_from([
    lambda a: dirac(a),
    lambda a: uniform([a, a + 1]),
    lambda a: SubDist({0: F(1, 3), a: F(1, 3)}),
    lambda a: SubDist({a % 2: F(1, 2)}, residual=F(1, 4)),
])


@settings(max_examples=150, deadline=None)
@given(distributions(), kernels, kernels)
def test_monad_laws(mu, k1, k2):
    assert bind(dirac(3), k1) == k1(3)
    assert bind(mu, dirac) == mu
    assert bind(bind(mu, k1), k2) == bind(mu, lambda a: bind(k1(a), k2))


@settings(max_examples=100, deadline=None)
@given(distributions(), distributions())
def test_product_marginals(mu, nu):
    pr = product(mu, nu)
    assert marginal(pr, 1).mass == {a: q * nu.weight for a, q in mu.mass.items()}
    assert marginal(pr, 2).mass == {b: q * mu.weight for b, q in nu.mass.items()}
    assert pr.weight == mu.weight * nu.weight


def test_bind_examples():
    coin = uniform([0, 1])
    two = bind(coin, lambda a: bind(coin, lambda b: dirac(a + b)))
    assert two.mass == {0: F(1, 4), 1: F(1, 2), 2: F(1, 4)}
    lossy = bind(coin, lambda a: SubDist({a: F(1, 2)}, residual=F(1, 2)))
    assert lossy.weight == F(1, 2) and lossy.residual == F(1, 2)


def test_marginal_and_product():
    mu = product(uniform([0, 1]), dirac("a"))
    assert mu.mass == {(0, "a"): F(1, 2), (1, "a"): F(1, 2)}
    assert marginal(mu, 2) == dirac("a")
    with pytest.raises(ValueError):
        marginal(dirac(3), 1)


@pytest.mark.parametrize("dist, expect", [
    (A.Bernoulli(A.Lit(F(1, 3))), {True: F(1, 3), False: F(2, 3)}),
    (A.UniformSet((A.Lit(1), A.Lit(2))), {1: F(1, 2), 2: F(1, 2)}),
])
def test_eval_dist(dist, expect):
    assert eval_dist(dist).mass == expect


def test_rejection_at_fuel_20():
    mu = run(typecheck(corpus_source("rejection"), {"size": 6}), 20)
    each = (1 - F(1, 2) ** 20) / 3
    assert mu.mass == {(True, 0): each, (True, 2): each, (True, 4): each}
    assert mu.residual == F(1, 2) ** 20
    assert mu.weight + mu.residual == 1


def test_ballot_always_ahead():
    tp = typecheck(corpus_source("ballot"), {"nA": 2, "nB": 1})
    mu = run(tp)
    names = tp.layout.names
    xa, xb, l = names.index("xA"), names.index("xB"), names.index("l")
    # AAB is the only order with A strictly ahead throughout and totals (2, 1)
    p = mu.pr(lambda s: s[xa] == 2 and s[xb] == 1 and all(v > 0 for v in s[l]))
    assert p == F(1, 8)
    assert mu.pr(lambda s: s[xa] == 2 and s[xb] == 1) == F(3, 8)


def test_abort_is_not_lossless():
    v = check_lossless(typed("program a var x: bool = false begin abort; end"))
    assert not v.ok and v.deficit == 1 and v.residual == 0


def test_uniformizer_residual():
    tp = typecheck(corpus_source("uniformizer"), {"p": F(1, 3)})
    v = check_lossless(tp, 60, tol=F(1, 2 ** 30))
    assert v.ok and v.kind == "within" and v.residual == F(5, 9) ** 60
    assert not check_lossless(tp, 10).ok


def test_runtime_error_mass():
    mu = run(typed("program e var x: range(3) = 0 var b: bool = false begin "
                   "b <$ flip(1/4); if b { x := 5; } end"))
    assert mu.error == F(1, 4) and mu.weight == F(3, 4)


def test_exact_lossless_straight_line():
    v = check_lossless(typed("program s var x: bool = false begin x <$ flip(1/2); end"))
    assert v.kind == "exact"


@settings(max_examples=60, deadline=None)
@given(programs)
def test_mass_conservation(text):
    mu = run(typecheck(parse_program(text), {}), 8)
    assert mu.weight + mu.residual + mu.error == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30))
def test_more_fuel_never_loses_mass(a, b):
    lo, hi = sorted((a, b))
    tp = typecheck(corpus_source("uniformizer"), {"p": F(1, 3)})
    m_lo, m_hi = run(tp, lo), run(tp, hi)
    assert m_lo.residual >= m_hi.residual
    assert all(m_lo[s] <= m_hi[s] for s in m_lo.support)
