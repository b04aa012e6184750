"""Couplings of finite sub-distributions.

Existence of a Psi-coupling is decided exactly as a transportation problem:
masses are scaled to integers and pushed through a max-flow network whose
middle edges are the pairs allowed by Psi. Sub-distributions of different
weight (from truncated loops) may route up to ``slack`` mass per side to an
overflow node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..semantics import SubDist, pr_event
from .flow import FlowNetwork

ZERO = Fraction(0)


@dataclass
class CouplingWitness:
    """Joint sub-distribution on pairs, plus mass routed through the overflow node."""

    joint: dict
    overflow_left: dict = field(default_factory=dict)   # x -> mass not matched on the right
    overflow_right: dict = field(default_factory=dict)  # y -> mass not matched on the left

    def marginal(self, i: int) -> dict:
        out: dict = {}
        for pair, p in self.joint.items():
            out[pair[i - 1]] = out.get(pair[i - 1], ZERO) + p
        return out

    def validate(self, mu1: SubDist, mu2: SubDist, psi: Callable | None = None,
                 slack: Fraction = ZERO) -> bool:
        """Marginals match up to the overflow, overflow within slack, support inside Psi."""
        m1, m2 = self.marginal(1), self.marginal(2)
        for x, p in self.overflow_left.items():
            m1[x] = m1.get(x, ZERO) + p
        for y, p in self.overflow_right.items():
            m2[y] = m2.get(y, ZERO) + p
        if {k: v for k, v in m1.items() if v} != mu1.mass:
            return False
        if {k: v for k, v in m2.items() if v} != mu2.mass:
            return False
        if sum(self.overflow_left.values(), ZERO) > slack:
            return False
        if sum(self.overflow_right.values(), ZERO) > slack:
            return False
        if any(p <= 0 for p in self.joint.values()):
            return False
        return psi is None or all(psi(x, y) for (x, y) in self.joint)


@dataclass
class Infeasible:
    """Hall-condition failure: mass of ``left_set`` exceeds what Psi lets it reach.

    ``left_mass`` > ``neighbour_mass`` + ``overflow`` whenever ``hall`` is True;
    otherwise the cut mixes in the right-hand overflow and only
    ``cut`` < ``required`` is claimed.
    """

    left_set: list
    left_mass: Fraction
    neighbour_mass: Fraction
    overflow: Fraction
    cut: Fraction
    required: Fraction
    hall: bool = True

    def __str__(self):
        s = ", ".join(map(repr, self.left_set[:8])) + (" ..." if len(self.left_set) > 8 else "")
        if self.hall:
            return (f"Hall violation: S = {{{s}}} has mass {self.left_mass} but Psi(S) "
                    f"has mass {self.neighbour_mass} (+ overflow {self.overflow})")
        return f"cut of capacity {self.cut} below required {self.required}; S = {{{s}}}"


def _scale(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def find_coupling(mu1: SubDist, mu2: SubDist, psi: Callable, slack: Fraction = ZERO):
    """A Psi-coupling of mu1 and mu2 (up to ``slack`` overflow per side) or a cut."""
    slack = Fraction(slack)
    w1, w2 = mu1.weight, mu2.weight
    if abs(w1 - w2) > slack:
        raise ValueError(f"weights {w1} and {w2} differ by more than slack {slack}")
    xs, ys = list(mu1.mass), list(mu2.mass)
    cap_l = slack - max(ZERO, w1 - w2)   # right-hand mass allowed to come from the overflow
    cap_r = slack - max(ZERO, w2 - w1)   # left-hand mass allowed to go to the overflow
    k = _scale(list(mu1.mass.values()) + list(mu2.mass.values()) + [cap_l, cap_r])
    S, T, DL, DR = 0, 1, 2, 3
    base = 4
    net = FlowNetwork(base + len(xs) + len(ys))
    supply = (w1 + cap_l) * k
    inf = int(supply) + 1
    for i, x in enumerate(xs):
        net.add_edge(S, base + i, int(mu1.mass[x] * k))
    y0 = base + len(xs)
    for j, y in enumerate(ys):
        net.add_edge(y0 + j, T, int(mu2.mass[y] * k))
    pair_edges = []
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if psi(x, y):
                pair_edges.append((x, y, net.add_edge(base + i, y0 + j, inf)))
    slack_edges_l, slack_edges_r = [], []
    if slack > 0:
        net.add_edge(S, DL, int(cap_l * k))
        net.add_edge(DR, T, int(cap_r * k))
        net.add_edge(DL, DR, inf)
        for i, x in enumerate(xs):
            slack_edges_l.append((x, net.add_edge(base + i, DR, inf)))
        for j, y in enumerate(ys):
            slack_edges_r.append((y, net.add_edge(DL, y0 + j, inf)))
    flow = net.max_flow(S, T)
    if flow == supply:
        joint = {}
        for x, y, e in pair_edges:
            f = net.flow_on(e)
            if f:
                joint[(x, y)] = Fraction(f, k)
        over_l = {x: Fraction(net.flow_on(e), k) for x, e in slack_edges_l if net.flow_on(e)}
        over_r = {y: Fraction(net.flow_on(e), k) for y, e in slack_edges_r if net.flow_on(e)}
        return CouplingWitness(joint, over_l, over_r)
    reach = net.reachable(S)
    left = [x for i, x in enumerate(xs) if base + i in reach]
    neigh = [y for j, y in enumerate(ys) if y0 + j in reach]
    lm = sum((mu1.mass[x] for x in left), ZERO)
    nm = sum((mu2.mass[y] for y in neigh), ZERO)
    over = cap_r if (slack > 0 and left) else ZERO
    return Infeasible(left, lm, nm, over, Fraction(flow, k), Fraction(supply, k),
                      hall=DL not in reach)


def check_f_coupling(mu1: SubDist, mu2: SubDist, f) -> bool:
    """mu1 and mu2 are f-coupled: f is a mass-preserving bijection between supports.

    ``f`` is a callable or a dict. Raises KeyError/ValueError when f is not
    total on supp(mu1).
    """
    fn = f.__getitem__ if isinstance(f, dict) else f
    if len(mu1.mass) != len(mu2.mass):
        return False
    image = set()
    for x, p in mu1.mass.items():
        y = fn(x)
        if y in image or mu2.mass.get(y) != p:
            return False
        image.add(y)
    return True


def f_witness(mu1: SubDist, f) -> CouplingWitness:
    fn = f.__getitem__ if isinstance(f, dict) else f
    return CouplingWitness({(x, fn(x)): p for x, p in mu1.mass.items()})


@dataclass
class Conclusion:
    relation: str          # "<=" or "="
    lhs: Fraction          # Pr_mu1[E1]
    rhs: Fraction          # Pr_mu2[E2]
    certified: bool
    slack: Fraction = ZERO
    witness: CouplingWitness | None = None
    certificate: Infeasible | None = None

    def __str__(self):
        rel = "<=" if self.relation == "<=" else "="
        tail = f" (up to slack {self.slack})" if self.slack else ""
        tag = "certified" if self.certified else f"not certified: {self.certificate}"
        return f"Pr[E1] = {self.lhs} {rel} Pr[E2] = {self.rhs}{tail}; {tag}"


def fundamental_lemma(mu1: SubDist, mu2: SubDist, e1: Callable, e2: Callable,
                      mode: str = "implies", slack: Fraction = ZERO, check: bool = True) -> Conclusion:
    """Conclude Pr[E1] <= Pr[E2] (or = in mode "iff") from a coupling on {E1 => E2}."""
    if mode == "implies":
        psi = lambda x, y: (not e1(x)) or e2(y)
        rel = "<="
    elif mode == "iff":
        psi = lambda x, y: bool(e1(x)) == bool(e2(y))
        rel = "="
    else:
        raise ValueError(f"unknown mode {mode!r}")
    slack = Fraction(slack)
    lhs, rhs = pr_event(mu1, e1), pr_event(mu2, e2)
    res = find_coupling(mu1, mu2, psi, slack)
    if isinstance(res, Infeasible):
        return Conclusion(rel, lhs, rhs, False, slack, certificate=res)
    if check:
        # the lemma itself, checked on the concrete numbers
        ok = lhs <= rhs + slack if rel == "<=" else abs(lhs - rhs) <= slack
        if not ok:
            raise AssertionError(f"coupling found but {lhs} {rel} {rhs} fails")
    return Conclusion(rel, lhs, rhs, True, slack, witness=res)


@dataclass
class PointwiseVerdict:
    equal: bool
    first_difference: object = None
    witnesses: dict = field(default_factory=dict)   # a -> CouplingWitness
    failures: dict = field(default_factory=dict)    # a -> Infeasible
    items: tuple = ()                               # the four equivalent statements

    @property
    def consistent(self) -> bool:
        return len(set(self.items)) == 1


def pointwise_eq_check(mu1: SubDist, mu2: SubDist, carrier=None) -> PointwiseVerdict:
    """Decide mu1 = mu2 four ways and cross-check they agree.

    The four statements: equality of the maps, equality of Pr[x = a] for each
    a, a coupling on {x1 = a <=> x2 = a} for each a, a coupling on equality.
    """
    if carrier is None:
        carrier = list(dict.fromkeys(list(mu1.mass) + list(mu2.mass)))
    else:
        carrier = list(carrier)
        extra = (mu1.support | mu2.support) - set(carrier)
        if extra:
            raise ValueError(f"values outside the carrier: {sorted(map(repr, extra))[:5]}")
    item1 = mu1.mass == mu2.mass
    item2 = all(mu1[a] == mu2[a] for a in carrier)
    witnesses, failures = {}, {}
    first = None
    for a in carrier:
        if mu1.weight != mu2.weight:
            failures[a] = None
            first = a if first is None else first
            continue
        res = find_coupling(mu1, mu2, lambda x, y, a=a: (x == a) == (y == a))
        if isinstance(res, Infeasible):
            failures[a] = res
            if first is None:
                first = a
        else:
            witnesses[a] = res
    item3 = not failures
    if mu1.weight != mu2.weight:
        item4 = False
    else:
        item4 = not isinstance(find_coupling(mu1, mu2, lambda x, y: x == y), Infeasible)
    if first is None and not item2:
        first = next(a for a in carrier if mu1[a] != mu2[a])
    return PointwiseVerdict(item3, first, witnesses, failures, (item1, item2, item3, item4))
