"""Uniformity, independence and conditional independence, each decided by
three routes: a checked proof script, semantic validity of the coupling
judgment family, and the exact output distribution (the oracle)."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .assertions import RelContext, eqmem, parse_assertion
from .coupling import Infeasible, fundamental_lemma
from .lang import ast as A
from .lang.evaluate import ExprError, compile_expr
from .lang.parser import parse_expr
from .lang.printer import format_expr, format_value
from .lang.typecheck import Scope, TypedProgram, TypeCheckError, check_expr, check_program_expr, typecheck
from .lang.types import BoolT, is_finite
from .prhl.checker import check_proof
from .report import fmt_q
from .prhl.judgment import Judgment, JudgmentSpec, build_side, instantiate_family
from .prhl.semantic import seed_states, validate_semantic
from .semantics import DEFAULT_FUEL, Executor, SubDist, classify, full_state
from .transform import rename_expr, self_compose, self_compose_state, tag_name

KINDS = ("uniform", "indep", "indep-uniform", "cond-indep")
ROUTES = ("proof", "semantic", "oracle")
DEFAULT_TOL = Fraction(1, 2 ** 30)

CERTIFIED, FAILS, INCONCLUSIVE, NOT_APPLICABLE = "CERTIFIED", "FAILS", "INCONCLUSIVE", "NOT-APPLICABLE"


class PropertyError(ValueError):
    """The query is malformed or its precondition does not hold."""


@dataclass
class PropertyQuery:
    program: A.Program
    exprs: tuple                       # variable names or expression texts
    kind: str = "uniform"
    route: str = "oracle"
    event: str | None = None           # E for cond-indep
    where: str | None = None           # restricts the carrier of a uniformity check
    proof: JudgmentSpec | None = None
    bindings: dict = field(default_factory=dict)
    fuel: int = DEFAULT_FUEL
    tol: Fraction = DEFAULT_TOL
    seed_enum: bool = False
    sample: int | None = None          # spot-check this many tuples instead of all
    sample_seed: int = 0
    pins: dict = field(default_factory=dict)   # fixes meta-parameters of the proof script


@dataclass
class Report:
    kind: str
    subject: str
    route: str
    verdict: str
    slack: Fraction = Fraction(0)
    max_deviation: Fraction = Fraction(0)
    instances: int = 0
    exhaustive: bool = True
    event: str | None = None
    reason: str = ""
    counterexample: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.verdict == CERTIFIED

    @property
    def title(self) -> str:
        label = {"uniform": "UNIFORM", "indep": "INDEPENDENT", "indep-uniform": "INDEPENDENT",
                 "cond-indep": "COND-INDEPENDENT"}[self.kind]
        given = f" | {self.event}" if self.event else ""
        return f"{label} {self.subject}{given}"

    def to_dict(self) -> dict:
        return {
            "type": "property", "kind": self.kind, "subject": self.subject, "event": self.event,
            "route": self.route, "verdict": self.verdict, "slack": self.slack,
            "max_deviation": self.max_deviation, "instances": self.instances,
            "exhaustive": self.exhaustive, "reason": self.reason,
            "counterexample": self.counterexample, "notes": list(self.notes),
        }

    def lines(self) -> list:
        out = [f"{self.title}: {self.verdict} (slack {fmt_q(self.slack, True)})"]
        detail = f"  route {self.route}, {self.instances} instance(s)"
        if self.max_deviation:
            detail += f", max deviation {fmt_q(self.max_deviation, True)}"
        if not self.exhaustive:
            detail += ", sampled (not exhaustive)"
        out.append(detail)
        if self.reason:
            out.append(f"  {self.reason}")
        if self.counterexample:
            out.append("  counterexample: " + ", ".join(f"{k}={format_value(v)}"
                                                        for k, v in self.counterexample.items()))
        out.extend(f"  note: {n}" for n in self.notes)
        return out


# --- tracked expressions --------------------------------------------------------------------

@dataclass
class Tracked:
    text: str
    raw: A.Expr            # parsed, untyped
    typed: A.Expr
    type: object
    fn: object             # state -> value

    def value(self, m):
        return self.fn(m, (), {})


def tracked(tp: TypedProgram, texts) -> list:
    if not texts:
        raise PropertyError("no variables or expressions to check")
    out = []
    slots = {None: tp.layout.slots}
    for text in texts:
        raw = parse_expr(text)
        try:
            te = check_program_expr(raw, tp)
        except TypeCheckError as exc:
            raise PropertyError(f"{text}: {exc}") from None
        if not is_finite(te.ty):
            raise PropertyError(f"{text}: type {te.ty} has no finite carrier; "
                                "track a variable of a bounded type instead")
        out.append(Tracked(text, raw, te, te.ty, compile_expr(te, slots, tp.funcs)))
    return out


def _carrier(tp: TypedProgram, items: list, where: str | None) -> list:
    tuples = list(itertools.product(*(list(t.type.values()) for t in items)))
    if where is None:
        return tuples
    names = [t.text for t in items]
    if not all(n.isidentifier() for n in names):
        raise PropertyError("--where needs plain variable names as the tracked items")
    scope = Scope({}, tp.consts, tp.funcs)
    try:
        te = check_expr(parse_expr(where), scope, {n: t.type for n, t in zip(names, items)})
    except Exception as exc:
        raise PropertyError(f"where: {exc}") from None
    if not isinstance(te.ty, BoolT):
        raise PropertyError("where must be a boolean condition")
    f = compile_expr(te, {}, tp.funcs)
    out = [v for v in tuples if f((), (), dict(zip(names, v)))]
    if not out:
        raise PropertyError("where excludes every value")
    return out


def _subject(items) -> str:
    return ", ".join(t.text for t in items)


def _seeds(q: PropertyQuery, tp: TypedProgram) -> list:
    return seed_states(tp, q.seed_enum)


def _lossless_problem(mu: SubDist, tol: Fraction) -> str | None:
    res = classify(mu, tol)
    if res.kind == "not":
        if res.deficit or res.error:
            return f"program is not lossless: {res}"
        return f"truncation residual {mu.residual} exceeds tolerance {tol}; raise the fuel"
    return None


def _sample(q: PropertyQuery, values: list) -> tuple[list, bool]:
    if q.sample is None or q.sample >= len(values):
        return values, True
    rng = random.Random(q.sample_seed)
    picked = sorted(rng.sample(range(len(values)), q.sample))
    return [values[i] for i in picked], False


def _tuple_dict(items, values) -> dict:
    return {t.text: v for t, v in zip(items, values)}


# --- entry point ----------------------------------------------------------------------------

def check(q: PropertyQuery) -> Report:
    if q.kind not in KINDS:
        raise PropertyError(f"unknown property {q.kind!r}")
    if q.route not in ROUTES:
        raise PropertyError(f"unknown route {q.route!r}")
    return {"uniform": check_uniform, "indep": check_indep_selfcomp,
            "indep-uniform": check_indep_via_uniformity, "cond-indep": check_cond_indep}[q.kind](q)


# --- uniformity -------------------------------------------------------------------------------

def check_uniform(q: PropertyQuery) -> Report:
    tp = typecheck(q.program, q.bindings)
    items = tracked(tp, q.exprs)
    carrier = _carrier(tp, items, q.where)
    rep = Report(q.kind if q.kind == "uniform" else "uniform", _subject(items), q.route, CERTIFIED)
    if q.where:
        rep.notes.append(f"carrier restricted to {q.where} ({len(carrier)} value(s))")
    if q.route == "oracle":
        return _uniform_oracle(q, tp, items, carrier, rep)
    pairs = list(itertools.product(carrier, carrier))
    pairs, rep.exhaustive = _sample(q, pairs)
    n = len(items)
    metas = {}
    for k, t in enumerate(items):
        metas[f"$a{k}"] = t.type
        metas[f"$b{k}"] = t.type
    lhs = A.conj(A.Binary("=", A.Tagged(t.raw, 1), A.Name(f"$a{k}")) for k, t in enumerate(items))
    rhs = A.conj(A.Binary("=", A.Tagged(t.raw, 2), A.Name(f"$b{k}")) for k, t in enumerate(items))
    post = A.Binary("<==>", lhs, rhs)
    pre = eqmem(list(tp.var_types))

    def values(pair):
        a, b = pair
        return {**{f"$a{k}": (a[k], items[k].type) for k in range(n)},
                **{f"$b{k}": (b[k], items[k].type) for k in range(n)}}

    seeds = _seeds(q, tp)
    seed_pairs = (seeds, seeds)
    if q.route == "semantic":
        return _semantic_family(q, tp, tp, pre, post, [values(p) for p in pairs], seed_pairs, rep,
                                lambda p: {**{f"{t.text}{{1}}": v for t, v in zip(items, p[0])},
                                           **{f"{t.text}{{2}}": v for t, v in zip(items, p[1])}},
                                pairs)
    order = [f"$a{k}" for k in range(n)] + [f"$b{k}" for k in range(n)]
    return _proof_family(q, tp, tp, ("self", "self"), pre, post, order,
                         {tuple(v for p in pair for v in p) for pair in pairs}, seed_pairs, rep, metas)


def _uniform_oracle(q, tp, items, carrier, rep):
    target = Fraction(1, len(carrier))
    ex = Executor(tp, q.fuel)
    worst_dev = Fraction(0)
    for m in _seeds(q, tp):
        mu = ex.run_dist(tp.body, {m: Fraction(1)})
        rep.instances += 1
        problem = _lossless_problem(mu, q.tol)
        if problem:
            rep.verdict = INCONCLUSIVE if "residual" in problem else FAILS
            rep.reason = problem
            rep.counterexample = tp.layout.as_dict(m) if q.seed_enum else None
            return rep
        rep.slack = max(rep.slack, mu.residual)
        dist: dict = {}
        for st, p in mu.mass.items():
            key = tuple(t.value(st) for t in items)
            dist[key] = dist.get(key, Fraction(0)) + p
        outside = {k: p for k, p in dist.items() if k not in set(carrier)}
        if outside:
            k = next(iter(outside))
            rep.verdict = FAILS
            rep.reason = f"mass {sum(outside.values())} outside the carrier"
            rep.counterexample = _tuple_dict(items, k)
            return rep
        checked, rep.exhaustive = _sample(q, carrier)
        for v in checked:
            dev = abs(dist.get(v, Fraction(0)) - target)
            if dev > worst_dev:
                worst_dev = dev
                if dev > mu.residual and rep.verdict == CERTIFIED:
                    rep.verdict = FAILS
                    rep.reason = f"Pr = {dist.get(v, Fraction(0))}, expected {target}"
                    rep.counterexample = _tuple_dict(items, v)
    rep.max_deviation = worst_dev
    return rep


# --- shared family drivers ---------------------------------------------------------------------

def _semantic_family(q, left, right, pre, post, instances, seeds, rep, describe, keys):
    cache: dict = {}
    for inst, key in zip(instances, keys):
        ctx = RelContext(left, right, inst)
        j = Judgment(left, right, parse_assertion(pre, ctx), parse_assertion(post, ctx), ctx,
                     {n: v for n, (v, _) in inst.items()})
        v = validate_semantic(j, q.fuel, seeds=seeds, dist_cache=cache)
        rep.instances += 1
        rep.slack = max(rep.slack, v.slack)
        if not v.holds:
            rep.verdict = FAILS
            m1, m2, why = v.failure
            rep.reason = f"no coupling: {why}"
            rep.counterexample = describe(key)
            return rep
    _check_residuals(q, cache, rep)
    return rep


def _check_residuals(q, cache, rep):
    for per_prog in cache.values():
        for mu in per_prog.values():
            problem = _lossless_problem(mu, q.tol)
            if problem:
                rep.verdict = INCONCLUSIVE if "residual" in problem else FAILS
                rep.reason = problem
                return


def _proof_family(q, left, right, shape, pre, post, order, required, seeds, rep, meta_types):
    """Check the supplied script on its own family and that the family covers the property.

    The first ``len(order)`` metas of the script stand for the property's
    tuple values, in that order; later metas are free parameters.
    """
    spec = q.proof
    if spec is None:
        raise PropertyError("the proof route needs a proof script (--proof FILE)")
    want = tuple(x if x == "self" else tuple(x) for x in shape)
    got = tuple(x if x == "self" else tuple(x) for x in (spec.left, spec.right))
    if got != want:
        raise PropertyError(f"proof script relates {got[0]} ~ {got[1]}, the property needs "
                            f"{want[0]} ~ {want[1]}")
    if len(spec.metas) < len(order):
        raise PropertyError(f"proof script declares {len(spec.metas)} meta-parameter(s), "
                            f"the property needs {len(order)}")
    covered: dict = {}
    cache: dict = {}
    unknown = set(q.pins) - {m.name for m in spec.metas}
    if unknown:
        raise PropertyError(f"proof script has no meta-parameter {sorted(unknown)[0]!r}")
    for j in instantiate_family(spec, q.program, q.bindings, only=q.pins or None):
        rep.instances += 1
        names = list(j.metas)
        key = tuple(j.metas[n] for n in names[: len(order)])
        extra = {n: j.ctx.metas[n] for n in names[len(order):]}
        v = check_proof(j, spec.proof, q.fuel, q.tol, seeds=seeds if q.seed_enum else None)
        if not v.accepted:
            rep.verdict = FAILS
            rep.reason = f"proof rejected [{j.instance}]: {v.error}"
            return rep
        # the script's judgment must say what the property needs
        inst = {name: (val, meta_types[name]) for name, val in zip(order, key)}
        inst.update(extra)
        ctx = RelContext(j.left, j.right, inst)
        mine_pre = parse_assertion(pre, ctx)
        mine_post = parse_assertion(post, ctx)
        bad = _compare(j, mine_pre, mine_post, seeds, q.fuel, cache)
        if bad:
            rep.verdict = FAILS
            rep.reason = f"proof script [{j.instance}] {bad}"
            return rep
        covered.setdefault(tuple(sorted((k, format_value(v)) for k, (v, _) in extra.items())),
                           set()).add(key)
    for group in sorted(covered):
        missing = sorted(required - covered[group], key=repr)
        if missing:
            rep.verdict = FAILS
            where = f" with {dict(group)}" if group else ""
            rep.reason = f"proof script does not cover the instance {missing[0]}{where}"
            return rep
    rep.notes.append("proof accepted on every instance")
    for per_prog in cache.values():
        for mu in per_prog.values():
            rep.slack = max(rep.slack, mu.residual)
    _check_residuals(q, cache, rep)
    return rep


def _compare(j: Judgment, pre, post, seeds, fuel, cache) -> str | None:
    """Script judgment vs property judgment, on the seeds and the reachable outputs."""
    ex1, ex2 = Executor(j.left, fuel), Executor(j.right, fuel)
    c1 = cache.setdefault((id(j.left), fuel), {})
    c2 = cache.setdefault((id(j.right), fuel), {})
    for m1 in seeds[0]:
        for m2 in seeds[1]:
            try:
                if not pre.eval_raw(m1, m2, {}):
                    continue
                if not j.pre.eval_raw(m1, m2, {}):
                    return "has a stronger precondition than the property"
            except ExprError as exc:
                return f"precondition cannot be evaluated: {exc}"
            if m1 not in c1:
                c1[m1] = ex1.run_dist(j.left.body, {m1: Fraction(1)})
            if m2 not in c2:
                c2[m2] = ex2.run_dist(j.right.body, {m2: Fraction(1)})
            for o1 in c1[m1].mass:
                for o2 in c2[m2].mass:
                    try:
                        same = bool(post.eval_raw(o1, o2, {})) == bool(j.post.eval_raw(o1, o2, {}))
                    except ExprError:
                        same = False
                    if not same:
                        return ("postcondition differs from the property's on outputs "
                                f"{j.left.layout.as_dict(o1)} / {j.right.layout.as_dict(o2)}")
    return None


# --- independence -------------------------------------------------------------------------------

def check_indep_via_uniformity(q: PropertyQuery) -> Report:
    rep = check_uniform(q)
    rep.kind = "indep-uniform"
    if rep.verdict == FAILS:
        rep.verdict = NOT_APPLICABLE
        rep.notes.append("the joint tuple is not uniform, so uniformity says nothing about independence")
    elif rep.verdict == CERTIFIED:
        rep.notes.append("jointly uniform, hence independent (and uniform)")
    return rep


def _composed_seeds(q, tp: TypedProgram, tpn: TypedProgram, n: int) -> list:
    return [full_state(tpn, self_compose_state(tp.layout.as_dict(m), n)) for m in _seeds(q, tp)]


def check_indep_selfcomp(q: PropertyQuery) -> Report:
    tp = typecheck(q.program, q.bindings)
    items = tracked(tp, q.exprs)
    n = len(items)
    rep = Report("indep", _subject(items), q.route, CERTIFIED)
    carrier = list(itertools.product(*(list(t.type.values()) for t in items)))
    carrier, rep.exhaustive = _sample(q, carrier)
    if q.route == "oracle":
        return _indep_oracle(q, tp, items, carrier, rep)
    source_n = self_compose(q.program, n)
    tpn = typecheck(source_n, q.bindings)
    names = list(tp.var_types)
    pre = A.conj(A.Binary("=", A.Name(x, 1), A.Name(tag_name(x, i), 2))
                 for x in names for i in range(1, n + 1))
    lhs = A.conj(A.Binary("=", A.Tagged(t.raw, 1), A.Name(f"$a{k}")) for k, t in enumerate(items))
    rhs = A.conj(A.Binary("=", A.Tagged(rename_expr(t.raw, {x: tag_name(x, k + 1) for x in names}), 2),
                          A.Name(f"$a{k}")) for k, t in enumerate(items))
    post = A.Binary("<==>", lhs, rhs)
    seeds = (_seeds(q, tp), _composed_seeds(q, tp, tpn, n))
    metas = {f"$a{k}": t.type for k, t in enumerate(items)}
    if q.route == "semantic":
        insts = [{f"$a{k}": (a[k], items[k].type) for k in range(n)} for a in carrier]
        return _semantic_family(q, tp, tpn, pre, post, insts, seeds, rep,
                                lambda a: _tuple_dict(items, a), carrier)
    return _proof_family(q, tp, tpn, ("self", ("selfcompose", n)), pre, post,
                         [f"$a{k}" for k in range(n)], set(carrier), seeds, rep, metas)


def _joint(mu: SubDist, fns) -> dict:
    out: dict = {}
    for st, p in mu.mass.items():
        key = tuple(f(st) for f in fns)
        out[key] = out.get(key, Fraction(0)) + p
    return out


def _indep_oracle(q, tp, items, carrier, rep):
    n = len(items)
    ex = Executor(tp, q.fuel)
    for m in _seeds(q, tp):
        mu = ex.run_dist(tp.body, {m: Fraction(1)})
        rep.instances += 1
        problem = _lossless_problem(mu, q.tol)
        if problem:
            rep.verdict = INCONCLUSIVE if "residual" in problem else FAILS
            rep.reason = problem
            return rep
        bound = (n + 1) * mu.residual
        rep.slack = max(rep.slack, bound)
        joint = _joint(mu, [t.value for t in items])
        margs = [_joint(mu, [t.value]) for t in items]
        for a in carrier:
            lhs = joint.get(a, Fraction(0))
            rhs = Fraction(1)
            for k in range(n):
                rhs *= margs[k].get((a[k],), Fraction(0))
            dev = abs(lhs - rhs)
            rep.max_deviation = max(rep.max_deviation, dev)
            if dev > bound and rep.verdict == CERTIFIED:
                rep.verdict = FAILS
                rep.reason = f"Pr[joint] = {lhs} but the product of marginals is {rhs}"
                rep.counterexample = _tuple_dict(items, a)
        if mu.residual == 0 and rep.verdict == CERTIFIED:
            _product_crosscheck(q, tp, items, carrier, mu, margs, rep)
    return rep


def _product_crosscheck(q, tp, items, carrier, mu, margs, rep):
    """The n-fold self-composition outputs the product of the marginals."""
    n = len(items)
    if n == 1 or q.seed_enum:
        return
    tpn = typecheck(self_compose(q.program, n), q.bindings)
    mun = Executor(tpn, q.fuel).run_dist(tpn.body, {tpn.init: Fraction(1)})
    names = list(tp.var_types)
    slots = {None: tpn.layout.slots}
    fns = []
    for k, t in enumerate(items):
        e = check_program_expr(rename_expr(t.raw, {x: tag_name(x, k + 1) for x in names}), tpn)
        f = compile_expr(e, slots, tpn.funcs)
        fns.append(lambda st, f=f: f(st, (), {}))
    joint = _joint(mun, fns)
    for a in carrier:
        prod = Fraction(1)
        for k in range(n):
            prod *= margs[k].get((a[k],), Fraction(0))
        if joint.get(a, Fraction(0)) != prod:
            raise AssertionError(f"self-composition output differs from the product at {a}")
    rep.notes.append("self-composition output equals the product of marginals")


# --- conditional independence -----------------------------------------------------------------

def _event(tp: TypedProgram, text: str, consts: dict | None = None):
    try:
        te = check_program_expr(parse_expr(text), tp, consts=consts)
    except TypeCheckError as exc:
        raise PropertyError(f"event {text}: {exc}") from None
    if not isinstance(te.ty, BoolT):
        raise PropertyError(f"event {text} must be boolean")
    f = compile_expr(te, {None: tp.layout.slots}, tp.funcs)
    return lambda st: bool(f(st, (), {}))


def check_cond_indep(q: PropertyQuery) -> Report:
    if not q.event:
        raise PropertyError("conditional independence needs an event (--event)")
    tp = typecheck(q.program, q.bindings)
    items = tracked(tp, q.exprs)
    n = len(items)
    rep = Report("cond-indep", _subject(items), q.route, CERTIFIED, event=q.event)
    carrier = list(itertools.product(*(list(t.type.values()) for t in items)))
    carrier, rep.exhaustive = _sample(q, carrier)
    # the oracle run also establishes Pr[E] > 0, which every route needs
    oracle = _cond_oracle(q, tp, items, carrier,
                          Report("cond-indep", rep.subject, "oracle", CERTIFIED, event=q.event))
    if q.route == "oracle":
        return oracle
    source_n = self_compose(q.program, n)
    tpn = typecheck(source_n, q.bindings)
    names = list(tp.var_types)
    ev = parse_expr(q.event)

    def copy(e, i):
        return rename_expr(e, {x: tag_name(x, i) for x in names})
    big_e = A.conj(copy(ev, i) for i in range(1, n + 1))
    pre = A.conj(A.Binary("=", A.Name(tag_name(x, i), 1), A.Name(tag_name(x, k), 2))
                 for x in names for i in range(1, n + 1) for k in range(1, n + 1))
    phi1 = A.conj([A.Binary("=", copy(t.raw, 1), A.Name(f"$a{k}")) for k, t in enumerate(items)] + [big_e])
    phi2 = A.conj([A.Binary("=", copy(t.raw, k + 1), A.Name(f"$a{k}")) for k, t in enumerate(items)]
                  + [big_e])
    post = A.Binary("<==>", A.Tagged(phi1, 1), A.Tagged(phi2, 2))
    base = _composed_seeds(q, tp, tpn, n)
    seeds = (base, base)
    metas = {f"$a{k}": t.type for k, t in enumerate(items)}
    if q.route == "semantic":
        insts = [{f"$a{k}": (a[k], items[k].type) for k in range(n)} for a in carrier]
        return _semantic_family(q, tpn, tpn, pre, post, insts, seeds, rep,
                                lambda a: _tuple_dict(items, a), carrier)
    return _proof_family(q, tpn, tpn, (("selfcompose", n), ("selfcompose", n)), pre, post,
                         [f"$a{k}" for k in range(n)], set(carrier), seeds, rep, metas)


def _cond_oracle(q, tp, items, carrier, rep):
    n = len(items)
    ev = _event(tp, q.event)
    ex = Executor(tp, q.fuel)
    for m in _seeds(q, tp):
        mu = ex.run_dist(tp.body, {m: Fraction(1)})
        rep.instances += 1
        problem = _lossless_problem(mu, q.tol)
        if problem:
            rep.verdict = INCONCLUSIVE if "residual" in problem else FAILS
            rep.reason = problem
            return rep
        pe = mu.pr(ev)
        if pe == 0:
            raise PropertyError(f"Pr[{q.event}] = 0: conditioning on it is undefined")
        bound = 2 * n * mu.residual
        rep.slack = max(rep.slack, bound)
        cond = SubDist({st: p for st, p in mu.mass.items() if ev(st)})
        joint = _joint(cond, [t.value for t in items])
        margs = [_joint(cond, [t.value]) for t in items]
        for a in carrier:
            lhs = joint.get(a, Fraction(0)) * pe ** (n - 1)
            rhs = Fraction(1)
            for k in range(n):
                rhs *= margs[k].get((a[k],), Fraction(0))
            dev = abs(lhs - rhs)
            rep.max_deviation = max(rep.max_deviation, dev)
            if dev > bound and rep.verdict == CERTIFIED:
                rep.verdict = FAILS
                rep.reason = (f"Pr[joint and E] * Pr[E]^{n - 1} = {lhs} but the product of "
                              f"Pr[x_i = a_i and E] is {rhs}")
                rep.counterexample = _tuple_dict(items, a)
    return rep


def cond_indep_by_definition(mu: SubDist, fns, event) -> bool:
    """Conditional independence straight from the definition (exact)."""
    pe = mu.pr(event)
    if pe == 0:
        raise PropertyError("Pr[E] = 0")
    cond = {st: p / pe for st, p in mu.mass.items() if event(st)}
    joint: dict = {}
    margs = [dict() for _ in fns]
    for st, p in cond.items():
        key = tuple(f(st) for f in fns)
        joint[key] = joint.get(key, Fraction(0)) + p
        for k, v in enumerate(key):
            margs[k][v] = margs[k].get(v, Fraction(0)) + p
    for key in itertools.product(*(list(mk) for mk in margs)):
        prod = Fraction(1)
        for k, v in enumerate(key):
            prod *= margs[k][v]
        if joint.get(key, Fraction(0)) != prod:
            return False
    return True


def cond_indep_unfolded(mu: SubDist, fns, event) -> bool:
    """The unfolded product identity, exact, with no division."""
    pe = mu.pr(event)
    if pe == 0:
        raise PropertyError("Pr[E] = 0")
    n = len(fns)
    joint: dict = {}
    margs = [dict() for _ in fns]
    for st, p in mu.mass.items():
        if not event(st):
            continue
        key = tuple(f(st) for f in fns)
        joint[key] = joint.get(key, Fraction(0)) + p
        for k, v in enumerate(key):
            margs[k][v] = margs[k].get(v, Fraction(0)) + p
    for key in itertools.product(*(list(mk) for mk in margs)):
        prod = Fraction(1)
        for k, v in enumerate(key):
            prod *= margs[k][v]
        if joint.get(key, Fraction(0)) * pe ** (n - 1) != prod:
            return False
    return True


# --- conclusions from accepted judgments ---------------------------------------------------------

@dataclass
class ProbabilityConclusion:
    statement: str
    relation: str
    lhs: Fraction
    rhs: Fraction
    slack: Fraction
    certified: bool

    def to_dict(self) -> dict:
        return {"type": "conclusion", "statement": self.statement, "relation": self.relation,
                "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "certified": self.certified}

    def lines(self) -> list:
        tag = "CERTIFIED" if self.certified else "FAILS"
        return [f"{self.statement} (slack {fmt_q(self.slack, True)}): {tag}",
                f"  oracle: {fmt_q(self.lhs, True)} {self.relation} {fmt_q(self.rhs, True)}"]


def split_post(post: A.Expr):
    """(E1, E2, mode) for a postcondition E1{1} ==> E2{2} or E1{1} <==> E2{2}."""
    from .assertions import tagged_vars
    e = post.expr if isinstance(post, A.Labeled) else post
    if not (isinstance(e, A.Binary) and e.op in ("==>", "<==>")):
        raise PropertyError("the postcondition must have the shape E1{1} ==> E2{2} or E1{1} <==> E2{2}")
    sides_l = {tag for _, tag in tagged_vars(e.left)}
    sides_r = {tag for _, tag in tagged_vars(e.right)}
    if not sides_l <= {1} or not sides_r <= {2}:
        raise PropertyError("the left of the postcondition may only mention side 1 and the right "
                            "only side 2")
    return e.left, e.right, ("implies" if e.op == "==>" else "iff")


def conclude_probability(j: Judgment, fuel: int = DEFAULT_FUEL, accepted: bool = True,
                         seed: tuple | None = None) -> ProbabilityConclusion:
    """Pr[E1] <= Pr[E2] (or =) from an accepted judgment with post E1{1} ==> E2{2}.

    The slack is the larger truncation residual of the two runs: the exact
    probabilities can exceed the truncated ones by at most that much.
    """
    if not accepted:
        raise PropertyError("the judgment was not accepted")
    e1, e2, mode = split_post(j.post.expr)
    f1 = compile_expr(e1, j.ctx.layouts, j.ctx.funcs)
    f2 = compile_expr(e2, j.ctx.layouts, j.ctx.funcs)
    m1, m2 = seed or (j.left.init, j.right.init)
    mu1 = Executor(j.left, fuel).run_dist(j.left.body, {m1: Fraction(1)})
    mu2 = Executor(j.right, fuel).run_dist(j.right.body, {m2: Fraction(1)})
    slack = max(mu1.residual, mu2.residual)
    c = fundamental_lemma(mu1, mu2, lambda s: f1(s, (), {}), lambda s: f2((), s, {}), mode, slack)
    if not c.certified and slack:
        c = fundamental_lemma(mu1, mu2, lambda s: f1(s, (), {}), lambda s: f2((), s, {}), mode,
                              mu1.residual + mu2.residual)
    rel = "<=" if mode == "implies" else "="
    text = f"Pr[{_plain(e1)}] {rel} Pr[{_plain(e2)}]"
    return ProbabilityConclusion(text, rel, c.lhs, c.rhs, c.slack, c.certified)


def _plain(e: A.Expr) -> str:
    """Assertion text with side tags dropped (each event lives on one side)."""
    return format_expr(_untag(e))


def _untag(e: A.Expr) -> A.Expr:
    from .assertions import map_children
    if isinstance(e, A.Var):
        return A.Var(e.name, None, ty=e.ty)
    if isinstance(e, A.Tagged):
        return _untag(e.expr)
    return map_children(e, _untag)
