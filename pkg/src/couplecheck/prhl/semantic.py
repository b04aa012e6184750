"""Semantic validity of judgments: a coupling of the two output distributions
inside the postcondition must exist for every seed pair satisfying the
precondition."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from ..assertions import BudgetExceeded
from ..coupling import Infeasible, find_coupling
from ..lang.evaluate import ExprError
from ..semantics import DEFAULT_FUEL, Executor
from .judgment import Judgment


@dataclass
class SemanticVerdict:
    holds: bool
    pairs: int = 0
    slack: Fraction = Fraction(0)
    witnesses: list = field(default_factory=list)
    failure: tuple | None = None     # (m1, m2, Infeasible or reason)
    instance: str = ""

    def __str__(self):
        head = f"[{self.instance}] " if self.instance else ""
        if self.holds:
            return f"{head}HOLDS on {self.pairs} seed pair(s) (slack {self.slack})"
        m1, m2, why = self.failure
        return f"{head}FAILS from {m1} / {m2}: {why}"


def seed_states(tp, enumerate_all: bool = False, budget: int = 10 ** 6):
    if not enumerate_all:
        return [tp.init]
    lay = tp.layout
    size = 1
    for t in lay.types[: lay.visible]:
        size *= t.domain_size()
    if size > budget:
        raise BudgetExceeded(size, budget)
    tail = tp.init[lay.visible:]
    return [tuple(vals) + tail for vals in itertools.product(*(list(t.values()) for t in lay.types[: lay.visible]))]


def validate_semantic(j: Judgment, fuel: int = DEFAULT_FUEL, seeds=None, keep_witnesses: bool = False,
                      slack: Fraction | None = None, dist_cache: dict | None = None) -> SemanticVerdict:
    """Check the judgment by exact max-flow on the output distributions.

    ``seeds`` is (left states, right states); pairs not satisfying the
    precondition are skipped. The slack defaults to the sum of residuals.
    ``dist_cache`` lets the instances of one family share program runs.
    """
    if seeds is None:
        seeds = ([j.left.init], [j.right.init])
    ex1, ex2 = Executor(j.left, fuel), Executor(j.right, fuel)
    vis1, vis2 = j.left.layout.visible, j.right.layout.visible
    post = j.post
    out = SemanticVerdict(True, instance=j.instance)
    shared = {} if dist_cache is None else dist_cache
    cache1 = shared.setdefault((id(j.left), fuel), {})
    cache2 = shared.setdefault((id(j.right), fuel), {})
    for m1 in seeds[0]:
        for m2 in seeds[1]:
            try:
                if not j.pre.eval_raw(m1, m2, {}):
                    continue
            except ExprError:
                continue
            if m1 not in cache1:
                cache1[m1] = ex1.run_dist(j.left.body, {m1: Fraction(1)})
            if m2 not in cache2:
                cache2[m2] = ex2.run_dist(j.right.body, {m2: Fraction(1)})
            mu1, mu2 = cache1[m1], cache2[m2]
            sl = mu1.residual + mu2.residual if slack is None else Fraction(slack)
            out.pairs += 1
            out.slack = max(out.slack, sl)
            lost = (1 - mu1.weight - mu1.residual, 1 - mu2.weight - mu2.residual)
            if abs(mu1.weight - mu2.weight) > sl:
                out.holds = False
                out.failure = (j.left.layout.as_dict(m1), j.right.layout.as_dict(m2),
                               f"output weights {mu1.weight} and {mu2.weight} differ beyond slack {sl}"
                               + (f" (mass lost to abort/errors: {lost[0]}, {lost[1]})" if any(lost) else ""))
                return out

            def psi(a, b):
                try:
                    return post.eval_raw(a, b, {})
                except ExprError:
                    return False
            res = find_coupling(mu1, mu2, psi, sl)
            if isinstance(res, Infeasible):
                res.left_set = [j.left.layout.as_dict(s) for s in res.left_set]
                out.holds = False
                out.failure = (j.left.layout.as_dict(m1), j.right.layout.as_dict(m2), res)
                return out
            if keep_witnesses:
                out.witnesses.append(res)
    return out
