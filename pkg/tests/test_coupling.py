from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings, strategies as st

from couplecheck.coupling import (CouplingWitness, Infeasible, check_f_coupling, f_witness, find_coupling,
                                  fundamental_lemma, pointwise_eq_check)
from couplecheck.semantics import SubDist, dirac, uniform
from strategies import distributions

coin = uniform([0, 1])
events = st.frozensets(st.integers(0, 4))


def test_identity_coupling():
    w = find_coupling(coin, coin, lambda x, y: x == y)
    assert isinstance(w, CouplingWitness)
    assert w.joint == {(0, 0): F(1, 2), (1, 1): F(1, 2)}
    assert w.validate(coin, coin, lambda x, y: x == y)


def test_swap_coupling():
    w = find_coupling(coin, coin, lambda x, y: x != y)
    assert w.joint == {(0, 1): F(1, 2), (1, 0): F(1, 2)}


def test_infeasible_reports_hall_violation():
    mu = SubDist({0: F(3, 4), 1: F(1, 4)})
    res = find_coupling(mu, coin, lambda x, y: x == y)
    assert isinstance(res, Infeasible) and res.hall
    assert res.left_mass > res.neighbour_mass + res.overflow
    assert "Hall violation" in str(res)


def test_slack_absorbs_a_small_mismatch():
    mu = SubDist({0: F(1, 2) + F(1, 8), 1: F(1, 2) - F(1, 8)})
    assert isinstance(find_coupling(mu, coin, lambda x, y: x == y), Infeasible)
    w = find_coupling(mu, coin, lambda x, y: x == y, slack=F(1, 8))
    assert isinstance(w, CouplingWitness) and w.validate(mu, coin, lambda x, y: x == y, F(1, 8))


def test_weights_must_agree_up_to_slack():
    with pytest.raises(ValueError):
        find_coupling(SubDist({0: F(1, 2)}), coin, lambda x, y: True)


def test_f_coupling():
    mu = uniform(range(4))
    assert check_f_coupling(mu, mu, lambda x: (x + 1) % 4)
    assert not check_f_coupling(mu, mu, lambda x: x // 2)
    assert check_f_coupling(coin, uniform(["a", "b"]), {0: "b", 1: "a"})
    assert f_witness(coin, lambda x: 1 - x).validate(coin, coin, lambda x, y: x != y)


def test_fundamental_lemma_examples():
    c = fundamental_lemma(coin, coin, lambda x: x == 1, lambda y: y == 0, mode="iff")
    assert c.certified and c.lhs == c.rhs == F(1, 2)
    mu = SubDist({0: F(1, 4), 1: F(3, 4)})
    c = fundamental_lemma(coin, mu, lambda x: x == 1, lambda y: y == 1)
    assert c.certified and c.lhs == F(1, 2) <= c.rhs == F(3, 4)
    c = fundamental_lemma(mu, coin, lambda x: x == 1, lambda y: y == 1)
    assert not c.certified and isinstance(c.certificate, Infeasible)


@settings(max_examples=200, deadline=None)
@given(distributions(proper=True), distributions(proper=True), events, events)
def test_coupling_on_implication_matches_probabilities(mu1, mu2, e1, e2):
    """A coupling inside {E1 ==> E2} exists exactly when Pr[E1] <= Pr[E2]."""
    res = find_coupling(mu1, mu2, lambda x, y: x not in e1 or y in e2)
    p1, p2 = mu1.pr(lambda v: v in e1), mu2.pr(lambda v: v in e2)
    if isinstance(res, CouplingWitness):
        assert res.validate(mu1, mu2, lambda x, y: x not in e1 or y in e2)
        assert p1 <= p2
    else:
        assert p1 > p2


@settings(max_examples=100, deadline=None)
@given(distributions(proper=True), distributions(proper=True), st.booleans())
def test_four_ways_to_equality_agree(mu1, mu2, same):
    if same:
        mu2 = mu1
    v = pointwise_eq_check(mu1, mu2, carrier=range(5))
    assert v.consistent
    assert v.equal == (mu1 == mu2)
    if not v.equal:
        assert mu1[v.first_difference] != mu2[v.first_difference] or mu1.weight != mu2.weight


@settings(max_examples=100, deadline=None)
@given(distributions(), st.integers(1, 4))
def test_witness_marginals(mu, shift):
    nu = mu.map(lambda x: x + shift)
    w = find_coupling(mu, nu, lambda x, y: y == x + shift)
    assert isinstance(w, CouplingWitness)
    assert w.marginal(1) == mu.mass and w.marginal(2) == nu.mass


def test_pointwise_rejects_values_outside_the_carrier():
    with pytest.raises(ValueError):
        pointwise_eq_check(dirac(7), dirac(7), carrier=range(3))
