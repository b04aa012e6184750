"""Acceptance criteria, one PASS/FAIL line each (shown in the terminal summary).

Tolerances are pinned here: probabilities are compared exactly as rationals,
and truncated loops are allowed at most their own residual mass. Runtime
limits are wall-clock seconds for the whole criterion.
"""
import itertools
import subprocess
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import pytest

from conftest import ACCEPTANCE, corpus_judgment, corpus_source
from couplecheck.lang import parse_expr, typecheck
from couplecheck.prhl import instantiate_family, prove_family, validate_semantic
from couplecheck.properties import PropertyQuery, check, cond_indep_unfolded, conclude_probability
from couplecheck.semantics import run
from couplecheck.transform import split_program

TOL = F(1, 2 ** 30)        # walk residual bound
LIMITS = {1: 5, 2: 10, 3: 60, 4: 30, 5: 30, 6: 10, 7: 10, 8: 120}


class Criterion:
    def __init__(self, n, title):
        self.n, self.title, self.failures = n, title, []
        self.start = time.perf_counter()

    def require(self, ok, what):
        if not ok:
            self.failures.append(what)

    def finish(self):
        elapsed = time.perf_counter() - self.start
        self.require(elapsed < LIMITS[self.n], f"runtime {elapsed:.1f}s over {LIMITS[self.n]}s")
        word = "FAIL" if self.failures else "PASS"
        tail = "; ".join(self.failures)
        line = f"{word} criterion {self.n}: {self.title} ({elapsed:.1f}s < {LIMITS[self.n]}s)"
        if tail:
            line += f" -- {tail}"
        ACCEPTANCE.append((self.n, line))
        print(line)
        assert not self.failures, tail


def values(tp, name):
    i = tp.layout.names.index(name)
    return lambda s: s[i]


def test_criterion_1_uniformizer():
    c = Criterion(1, "Bernoulli uniformizer")
    src, spec = corpus_source("uniformizer"), corpus_judgment("uniformizer")
    for p in (F(1, 3), F(1, 2), F(2, 3)):
        tp = typecheck(src, {"p": p})
        mu = run(tp, 60)
        x = values(tp, "x")
        dev = abs(mu.pr(lambda s: x(s)) - mu.pr(lambda s: not x(s)))
        c.require(dev <= F(5, 9) ** 60, f"p={p}: deviation {dev}")
        c.require(mu.residual == (p ** 2 + (1 - p) ** 2) ** 60, f"p={p}: residual {mu.residual}")
        c.require(prove_family(src, spec, {"p": p}, fuel=60).ok, f"p={p}: proof rejected")
        (j,) = instantiate_family(spec, src, {"p": p})
        con = conclude_probability(j, fuel=60)
        c.require(con.certified and con.statement == "Pr[x] = Pr[!x]", f"p={p}: conclusion {con.statement}")
    c.finish()


def test_criterion_2_ballot():
    c = Criterion(2, "ballot theorem")
    src, spec = corpus_source("ballot"), corpus_judgment("ballot")
    for (na, nb), expect in zip([(2, 1), (3, 1), (3, 2)], [F(1, 3), F(1, 2), F(1, 5)]):
        c.require(expect == F(na - nb, na + nb), "table")
        tp = typecheck(src, {"nA": na, "nB": nb})
        mu = run(tp)
        xa, xb, l = (values(tp, v) for v in ("xA", "xB", "l"))
        totals = lambda s: xa(s) == na and xb(s) == nb
        pr = mu.pr(lambda s: totals(s) and all(v > 0 for v in l(s))) / mu.pr(totals)
        c.require(pr == expect and mu.residual == 0, f"({na},{nb}): Pr = {pr}, residual {mu.residual}")
        c.require(prove_family(src, spec, {"nA": na, "nB": nb}).ok, f"({na},{nb}): proof rejected")
    c.finish()


def test_criterion_3_walk():
    c = Criterion(3, "cyclic random walk")
    src = corpus_source("walk")
    for n, fuel in ((3, 64), (4, 64), (5, 200)):
        tp = typecheck(src, {"n": n})
        mu = run(tp, fuel)
        c.require(mu.residual <= TOL, f"n={n}: residual {mu.residual}")
        ret = values(tp, "ret")
        worst = max(abs(mu.pr(lambda s: ret(s)[0] == a) - F(1, n)) for a in range(n))
        c.require(worst <= mu.residual, f"n={n}: arc deviation {worst}")
    tp = typecheck(src, {"n": 3})
    base = run(tp, 64)
    for a in range(3):
        e1 = parse_expr("!((a - f) <= (l - f)) && !((a + 1 - f) <= (l - f))")
        e2 = parse_expr("!((a - f) <= (l - f) && (a + 1 - f) <= (l - f))")
        q = split_program(split_program(src, 5, e1, {"a": a}), 6, e2, {"a": a})
        c.require(run(typecheck(q, {"n": 3}), 64) == base, f"split at a={a} changes the output")
    sem = check(PropertyQuery(src, ("ret.0",), "uniform", "semantic", bindings={"n": 3}))
    c.require(sem.ok and sem.instances == 9, f"semantic route: {sem.verdict}")
    fam = prove_family(src, corpus_judgment("walk"), {"n": 3})
    c.require(fam.ok, "walk proof rejected: " + "; ".join(str(v) for v in fam.rejected[:2]))
    c.finish()


def test_criterion_4_pairwise():
    c = Criterion(4, "pairwise independence")
    src = corpus_source("pairwise")
    for n in (2, 3):
        subsets = range(1, 2 ** n)
        for x, y in itertools.combinations(subsets, 2):
            for route in ("oracle", "semantic"):
                r = check(PropertyQuery(src, (f"z[{x}]", f"z[{y}]"), "indep", route, bindings={"n": n}))
                c.require(r.ok, f"n={n} z[{x}], z[{y}] {route}: {r.verdict}")
    r = check(PropertyQuery(src, ("z[1]", "z[3]"), "indep", "proof", proof=corpus_judgment("pairwise"),
                            bindings={"n": 2}))
    c.require(r.ok, f"proof route: {r.verdict} {r.reason}")
    c.finish()


def test_criterion_5_kwise():
    c = Criterion(5, "k-wise independence")
    src, spec = corpus_source("kwise"), corpus_judgment("kwise")
    for p, k, n in ((3, 2, 3), (5, 2, 3)):
        tp = typecheck(src, {"p": p, "k": k, "n": n})
        mu = run(tp)
        x = values(tp, "x")
        for idx in itertools.combinations(range(n), k):
            joint = mu.map(lambda s: tuple(x(s)[i] for i in idx))
            ok = mu.residual == 0 and len(joint.mass) == p ** k and all(
                q == F(1, p ** k) for q in joint.mass.values())
            c.require(ok, f"p={p}: subset {idx} not uniform")
        r = check(PropertyQuery(src, ("x[0]", "x[1]"), "uniform", "proof", proof=spec,
                                bindings={"p": p, "k": k, "n": n}))
        c.require(r.ok, f"p={p}: proof route {r.verdict} {r.reason}")
    c.finish()


def _criterion_6_parts():
    """(claim, reproduced, detail) for each part of the conditional independence criterion."""
    src, spec = corpus_source("condindep"), corpus_judgment("condindep")
    tp = typecheck(src, {})
    mu = run(tp)
    w, w2, y = (values(tp, v) for v in ("w", "w'", "y"))
    parts = []
    for cval in (True, False):
        ok = cond_indep_unfolded(mu, [w, w2], lambda s: y(s) == cval)
        r = check(PropertyQuery(src, ("w", "w'"), "cond-indep", "oracle", event=f"y = {str(cval).lower()}"))
        parts.append((f"w, w' independent given y = {cval}", ok and r.ok, r.verdict))
        r = check(PropertyQuery(src, ("w", "w'"), "cond-indep", "proof", event=f"y = {str(cval).lower()}",
                                proof=spec, pins={"c": cval}))
        parts.append((f"self-composed judgment accepted for y = {cval}", r.ok, r.verdict))
    fam = prove_family(src, spec)
    parts.append(("z-swap script accepted on its whole family", fam.ok, f"{len(fam.verdicts)} instances"))
    joint = mu.pr(lambda s: w(s) and w2(s))
    product = mu.pr(w) * mu.pr(w2)
    r = check(PropertyQuery(src, ("w", "w'"), "indep", "oracle"))
    parts.append(("dependence reported when E is true", not r.ok,
                  f"not reproduced: Pr[w and w'] = {joint} = Pr[w] Pr[w'] = {product} with fair coins"))
    return parts


def test_criterion_6_conditional_parts():
    """Every part of criterion 6 except the unconditional dependence claim."""
    for claim, ok, detail in _criterion_6_parts()[:-1]:
        assert ok, f"{claim}: {detail}"


@pytest.mark.xfail(strict=True, reason="with fair coins w and w' are independent outright "
                                       "(Pr[w and w'] = 1/4 = Pr[w] Pr[w']), so no dependence can be shown")
def test_criterion_6_condindep():
    c = Criterion(6, "conditional independence")
    for claim, ok, detail in _criterion_6_parts():
        c.require(ok, f"{claim}: {detail}")
    c.finish()


def test_criterion_7_rejection():
    c = Criterion(7, "rejection sampling")
    src = corpus_source("rejection")
    tp = typecheck(src, {"size": 6})
    mu = run(tp, 40)
    x = values(tp, "x")
    c.require(mu.residual == F(1, 2) ** 40, f"residual {mu.residual}")
    c.require(all(x(s) in (0, 2, 4) for s in mu.support), "odd value in the support")
    worst = max(abs(mu.pr(lambda s: x(s) == a) - F(1, 3)) for a in (0, 2, 4))
    c.require(worst <= F(1, 2) ** 40, f"deviation {worst}")
    fam = prove_family(src, corpus_judgment("rejection"), {"size": 6}, fuel=40)
    c.require(fam.ok and len(fam.verdicts) == 9, f"proof: {len(fam.rejected)} of {len(fam.verdicts)} rejected")
    c.finish()


SUITES = [
    "test_coupling.py::test_coupling_on_implication_matches_probabilities",   # (a) 200 pairs
    "test_coupling.py::test_four_ways_to_equality_agree",                      # (b) 100 pairs
    "test_transform.py::test_self_composition_runs_the_product",               # (c) 50 programs
    "test_transform.py::test_self_composition_preserves_event_probabilities",  # (c) with events
    "test_prhl.py::test_accepted_instances_hold_semantically",                 # (d)
    "test_semantics.py::test_monad_laws",                                      # (e)
    "test_semantics.py::test_product_marginals",
    "test_semantics.py::test_mass_conservation",
    "test_assertions.py::test_substitution_lemma",
    "test_lang.py::test_parse_print_round_trip",
]


def test_criterion_8_property_suites():
    c = Criterion(8, "property suites")
    here = Path(__file__).parent
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           *(str(here / s) for s in SUITES)], capture_output=True, text=True, cwd=here.parent)
    last = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    c.require(proc.returncode == 0, last)
    c.finish()
