"""Proof-script checker for pRHL judgments.

Each rule node is checked against the pair of statement lists it covers and
the postcondition it must establish, and returns the precondition it
guarantees (substitution for assignments and samples, the invariant for
loops). Side conditions are implications decided by enumeration over the
product of the state sets reachable at that program point on each side,
starting from the judgment's seed states. Soundness is therefore relative to
the seeds: with ``seed_enum`` every type-correct initial state is a seed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from ..assertions import Assertion, subst_many, retag, tagged_vars, walk, BudgetExceeded
from ..lang import ast as A
from ..lang.evaluate import ExprError, compile_expr, dist_support, f_coupled
from ..lang.parser import parse_expr, parse_lambda
from ..lang.printer import format_expr, format_stmt, format_value
from ..lang.typecheck import (TypeCheckError, assignable, check_assertion, check_expr, check_stmts,
                              check_program_expr, Scope)
from ..lang.types import BoolT, ListT, TupleT
from ..semantics import DEFAULT_FUEL, Executor, classify
from ..transform import SwapError, semantic_equiv, while_split
from .judgment import Judgment, Node

TRUE = A.Lit(True, ty=BoolT())


class Rejected(Exception):
    """A rule does not apply or one of its side conditions fails."""

    def __init__(self, path, rule, reason, counterexample=None):
        self.path, self.rule, self.reason = path, rule, reason
        self.counterexample = counterexample
        msg = f"{path}: {rule}: {reason}"
        if counterexample:
            msg += f" [{counterexample}]"
        super().__init__(msg)


@dataclass
class Obligation:
    path: str
    rule: str
    kind: str
    pairs: int
    ok: bool
    detail: str = ""
    residual: Fraction = Fraction(0)


@dataclass
class Verdict:
    accepted: bool
    log: list = field(default_factory=list)
    error: Rejected | None = None
    instance: str = ""

    def __str__(self):
        head = f"[{self.instance}] " if self.instance else ""
        if self.accepted:
            return f"{head}ACCEPTED ({len(self.log)} obligations)"
        return f"{head}REJECTED at {self.error}"


def _and(*xs):
    items = [x for x in xs if not (isinstance(x, A.Lit) and x.value is True)]
    if not items:
        return TRUE
    out = items[-1]
    for x in reversed(items[:-1]):
        out = A.Binary("&&", x, out, ty=BoolT())
    return out


def _imp(a, b):
    return A.Binary("==>", a, b, ty=BoolT())


def _not(a):
    return A.Unary("!", a, ty=BoolT())


def _eq(a, b):
    return A.Binary("=", a, b, ty=BoolT())


def _conjuncts(e):
    if isinstance(e, A.Binary) and e.op == "&&":
        return _conjuncts(e.left) + _conjuncts(e.right)
    return [e]


def _short(e, n=160):
    if isinstance(e, A.Labeled):
        return e.label
    s = format_expr(e)
    return s if len(s) <= n else s[: n - 3] + "..."


class Checker:
    def __init__(self, j: Judgment, fuel: int = DEFAULT_FUEL, tol: Fraction = Fraction(1, 2 ** 30),
                 budget: int = 10 ** 7, seeds=None):
        self.j = j
        self.ctx = j.ctx
        self.fuel, self.tol, self.budget = fuel, tol, budget
        self.ex = {1: Executor(j.left, fuel), 2: Executor(j.right, fuel)}
        self.tp = {1: j.left, 2: j.right}
        self.log: list[Obligation] = []
        if seeds is None:
            seeds = ([j.left.init], [j.right.init])
        self.seeds = (set(seeds[0]), set(seeds[1]))

    # -- entry point
    def run(self, script: Node) -> Verdict:
        try:
            c1 = A.flatten(self.j.left.body)
            c2 = A.flatten(self.j.right.body)
            R1, R2 = self.seeds
            pre = self.node(script, c1, c2, R1, R2, self.j.post.expr, "proof")
            self.implies(self.j.pre.expr, pre, R1, R2, "proof", "judgment", "precondition")
            return Verdict(True, self.log, instance=self.j.instance)
        except Rejected as r:
            return Verdict(False, self.log, r, instance=self.j.instance)
        except (TypeCheckError, ExprError) as exc:
            return Verdict(False, self.log, Rejected("proof", "script", str(exc)), instance=self.j.instance)

    # -- helpers
    def reach(self, side, stmts, R):
        if not stmts or not R:
            return set(R)
        d = {m: Fraction(1) for m in R}
        return set(self.ex[side].run_dist(A.seq(stmts), d).mass)

    def compile(self, e):
        return compile_expr(e, self.ctx.layouts, self.ctx.funcs)

    def describe(self, s1, s2):
        lay1, lay2 = self.j.left.layout, self.j.right.layout
        parts = [f"{k}{{1}}={format_value(v)}" for k, v in lay1.as_dict(s1).items()]
        parts += [f"{k}{{2}}={format_value(v)}" for k, v in lay2.as_dict(s2).items()]
        return ", ".join(parts)

    def implies(self, a, b, H1, H2, path, rule, kind):
        """Check a ==> b on every pair of H1 x H2."""
        if isinstance(b, A.Lit) and b.value is True:
            self.log.append(Obligation(path, rule, kind, 0, True, "trivial"))
            return
        n = len(H1) * len(H2)
        if n > self.budget:
            raise BudgetExceeded(n, self.budget)
        fa, fb = self.compile(a), self.compile(b)
        trivial_a = isinstance(a, A.Lit) and a.value is True
        checked = 0
        for s1, s2 in itertools.product(sorted(H1, key=repr), sorted(H2, key=repr)):
            try:
                if not trivial_a and not fa(s1, s2, {}):
                    continue
                checked += 1
                if fb(s1, s2, {}):
                    continue
                why = self.failing_part(b, s1, s2)
            except ExprError as exc:
                why = f"evaluation error: {exc}"
            self.log.append(Obligation(path, rule, kind, checked, False, why))
            raise Rejected(path, rule, f"{kind} fails: {why}", self.describe(s1, s2))
        self.log.append(Obligation(path, rule, kind, checked, True))

    def failing_part(self, b, s1, s2, bound=None):
        """Smallest sub-formula of b that fails on (s1, s2), with quantifier witnesses."""
        bound = dict(bound or {})

        def ev(e):
            return bool(self.compile(e)(s1, s2, bound))

        try:
            if isinstance(b, A.Labeled):
                return self.failing_part(b.expr, s1, s2, bound)
            if isinstance(b, A.Binary) and b.op == "&&":
                for c in _conjuncts(b):
                    if not ev(c):
                        return self.failing_part(c, s1, s2, bound)
            if isinstance(b, A.Binary) and b.op == "==>" and ev(b.left):
                return self.failing_part(b.right, s1, s2, bound)
            if isinstance(b, A.Quant) and b.kind == "forall":
                if isinstance(b.domain, tuple):
                    values = [self.compile(d)(s1, s2, bound) for d in b.domain]
                else:
                    values = list(b.domain.values())
                for v in values:
                    inner = {**bound, b.var: v}
                    if not bool(self.compile(b.body)(s1, s2, inner)):
                        return f"for {b.var} = {v!r}: " + self.failing_part(b.body, s1, s2, inner)
        except ExprError as exc:
            return f"{_short(b)} (error: {exc})"
        return _short(b)

    def _holds(self, e, s1, s2):
        try:
            return bool(self.compile(e)(s1, s2, {}))
        except ExprError:
            return False

    def assertion(self, text, bound=None):
        e = parse_expr(text, relational=True) if isinstance(text, str) else text
        return check_assertion(e, self.j.left, self.j.right, self.ctx.metas, bound)

    def side_expr(self, side, e):
        """A typed program expression of one side, tagged with that side."""
        return retag(e, side)

    # -- rules
    def node(self, n: Node, c1, c2, R1, R2, post, path):
        handler = getattr(self, "rule_" + n.rule)
        return handler(n, c1, c2, R1, R2, post, f"{path}/{n.rule}")

    def expect(self, cond, path, rule, msg):
        if not cond:
            raise Rejected(path, rule, msg)

    def _shape(self, c, cls, path, rule, side):
        ok = len(c) == 1 and isinstance(c[0], cls)
        what = "; ".join(format_stmt(s).strip() for s in c) or "skip"
        self.expect(ok, path, rule, f"{'left' if side == 1 else 'right'} program must be a single "
                    f"{cls.__name__.lower()} statement, found: {what[:120]}")
        return c[0]

    def rule_skip(self, n, c1, c2, R1, R2, post, path):
        self.expect(not c1 and not c2, path, "skip", "both programs must be skip")
        return post

    def _assign_map(self, s, side):
        var = A.Var(s.var, side, ty=self.tp[side].layout.type_of(s.var))
        if s.index is None:
            return {(s.var, side): self.side_expr(side, s.expr)}
        r = A.Call("update", (var, self.side_expr(side, s.index), self.side_expr(side, s.expr)), ty=var.ty)
        return {(s.var, side): r}

    def rule_assg(self, n, c1, c2, R1, R2, post, path):
        s1 = self._shape(c1, A.Assign, path, "assg", 1)
        s2 = self._shape(c2, A.Assign, path, "assg", 2)
        return subst_many(post, {**self._assign_map(s1, 1), **self._assign_map(s2, 2)})

    def rule_assgl(self, n, c1, c2, R1, R2, post, path):
        s1 = self._shape(c1, A.Assign, path, "assgl", 1)
        self.expect(not c2, path, "assgl", "right program must be skip")
        return subst_many(post, self._assign_map(s1, 1))

    def rule_assgr(self, n, c1, c2, R1, R2, post, path):
        s2 = self._shape(c2, A.Assign, path, "assgr", 2)
        self.expect(not c1, path, "assgr", "left program must be skip")
        return subst_many(post, self._assign_map(s2, 2))

    def _sample_info(self, s, side):
        t = self.tp[side].layout.type_of(s.var)
        if s.index is not None:
            if isinstance(t, TupleT):
                elem = t.elems[s.index.value] if isinstance(s.index, A.Lit) else t.elems[0]
            else:
                elem = t.elem
        else:
            elem = t
        return elem, dist_support(s.dist, elem)

    def _sampled(self, s, side, value):
        """Replacement for the sampled variable once it takes ``value``."""
        t = self.tp[side].layout.type_of(s.var)
        if s.index is None:
            return value
        var = A.Var(s.var, side, ty=t)
        return A.Call("update", (var, self.side_expr(side, s.index), value), ty=t)

    def rule_rand(self, n, c1, c2, R1, R2, post, path):
        s1 = self._shape(c1, A.Sample, path, "rand", 1)
        s2 = self._shape(c2, A.Sample, path, "rand", 2)
        t1, g1 = self._sample_info(s1, 1)
        t2, g2 = self._sample_info(s2, 2)
        ftext = str(n.args.get("f", "fun v -> v"))
        v, body = parse_lambda(ftext)
        fbody = self.assertion_expr(body, {v: t1}, path)
        if not assignable(t2, fbody.ty):
            raise Rejected(path, "rand", f"bijection returns {fbody.ty}, sample needs {t2}")
        atom = A.FCoupled(g1, g2, v, fbody, var_ty=t1, ty=BoolT())
        conds = []
        if not tagged_vars(fbody):
            fn = self.compile(fbody)
            ok = f_coupled(dict(g1), dict(g2), lambda x: fn((), (), {v: x}))
            self.log.append(Obligation(path, "rand", "bijection", len(g1), ok, ftext))
            if not ok:
                raise Rejected(path, "rand", f"{ftext} is not a mass-preserving bijection "
                               f"between the sampled distributions")
        else:
            conds.append(A.Labeled(f"rand bijection {ftext}", atom, ty=BoolT()))
        x1 = A.Bound(v, ty=t1)
        body_post = subst_many(post, {(s1.var, 1): self._sampled(s1, 1, x1),
                                      (s2.var, 2): self._sampled(s2, 2, fbody)})
        dom = tuple(A.Lit(x, ty=t1) for x, _ in g1)
        conds.append(A.Quant("forall", v, dom, body_post, ty=BoolT()))
        return _and(*conds)

    def assertion_expr(self, e, bound, path):
        try:
            return self._check_any(e, bound)
        except TypeCheckError as exc:
            raise Rejected(path, "script", str(exc)) from None

    def _check_any(self, e, bound):
        from ..lang.typecheck import _Fail
        scope = Scope({1: self.j.left.var_types, 2: self.j.right.var_types},
                      {**self.j.left.consts, **self.j.right.consts, **self.ctx.metas},
                      self.ctx.funcs, relational=True)
        try:
            return check_expr(e, scope, dict(bound))
        except _Fail as exc:
            raise TypeCheckError([str(exc)]) from None

    def _one_sided_rand(self, n, c, other, side, post, path, rule):
        s = self._shape(c, A.Sample, path, rule, side)
        self.expect(not other, path, rule, f"{'right' if side == 1 else 'left'} program must be skip")
        t, g = self._sample_info(s, side)
        v = f"v{side}"
        body = subst_many(post, {(s.var, side): self._sampled(s, side, A.Bound(v, ty=t))})
        return A.Quant("forall", v, tuple(A.Lit(x, ty=t) for x, _ in g), body, ty=BoolT())

    def rule_randl(self, n, c1, c2, R1, R2, post, path):
        return self._one_sided_rand(n, c1, c2, 1, post, path, "randl")

    def rule_randr(self, n, c1, c2, R1, R2, post, path):
        return self._one_sided_rand(n, c2, c1, 2, post, path, "randr")

    def _guard(self, side, e):
        return self.side_expr(side, e)

    def _filter(self, side, R, e, want=True):
        f = compile_expr(e, {None: self.tp[side].layout.slots, 1: self.tp[side].layout.slots},
                         self.tp[side].funcs)
        out = set()
        for m in R:
            try:
                if bool(f(m, m, {})) == want:
                    out.add(m)
            except ExprError:
                pass
        return out

    def rule_cond(self, n, c1, c2, R1, R2, post, path):
        s1 = self._shape(c1, A.If, path, "cond", 1)
        s2 = self._shape(c2, A.If, path, "cond", 2)
        pt = self.node(n.children[0], A.flatten(s1.then), A.flatten(s2.then),
                       self._filter(1, R1, s1.cond), self._filter(2, R2, s2.cond), post, path + "[then]")
        pf = self.node(n.children[1], A.flatten(s1.else_), A.flatten(s2.else_),
                       self._filter(1, R1, s1.cond, False), self._filter(2, R2, s2.cond, False),
                       post, path + "[else]")
        g1, g2 = self._guard(1, s1.cond), self._guard(2, s2.cond)
        return _and(A.Labeled("guards agree", _eq(g1, g2), ty=BoolT()), _imp(g1, pt), _imp(_not(g1), pf))

    def rule_condl(self, n, c1, c2, R1, R2, post, path):
        s1 = self._shape(c1, A.If, path, "condl", 1)
        pt = self.node(n.children[0], A.flatten(s1.then), c2, self._filter(1, R1, s1.cond), R2,
                       post, path + "[then]")
        pf = self.node(n.children[1], A.flatten(s1.else_), c2, self._filter(1, R1, s1.cond, False), R2,
                       post, path + "[else]")
        g1 = self._guard(1, s1.cond)
        return _and(_imp(g1, pt), _imp(_not(g1), pf))

    def rule_condr(self, n, c1, c2, R1, R2, post, path):
        s2 = self._shape(c2, A.If, path, "condr", 2)
        pt = self.node(n.children[0], c1, A.flatten(s2.then), R1, self._filter(2, R2, s2.cond),
                       post, path + "[then]")
        pf = self.node(n.children[1], c1, A.flatten(s2.else_), R1, self._filter(2, R2, s2.cond, False),
                       post, path + "[else]")
        g2 = self._guard(2, s2.cond)
        return _and(_imp(g2, pt), _imp(_not(g2), pf))

    def loop_heads(self, side, loop, R):
        """States reachable at the head of ``loop`` from R, up to the fuel bound."""
        heads = set(R)
        frontier = set(R)
        for _ in range(self.fuel):
            inside = self._filter(side, frontier, loop.cond)
            if not inside:
                break
            nxt = self.reach(side, A.flatten(loop.body), inside) - heads
            heads |= nxt
            frontier = nxt
        return heads

    def inv(self, n, path):
        try:
            return A.Labeled("invariant", self.assertion(str(n.args["inv"])), ty=BoolT())
        except TypeCheckError as exc:
            raise Rejected(path, n.rule, f"invariant: {exc}") from None

    def rule_while(self, n, c1, c2, R1, R2, post, path):
        w1 = self._shape(c1, A.While, path, "while", 1)
        w2 = self._shape(c2, A.While, path, "while", 2)
        psi = self.inv(n, path)
        g1, g2 = self._guard(1, w1.cond), self._guard(2, w2.cond)
        H1, H2 = self.loop_heads(1, w1, R1), self.loop_heads(2, w2, R2)
        sync = A.Labeled("guards agree", _eq(g1, g2), ty=BoolT())
        B1, B2 = self._filter(1, H1, w1.cond), self._filter(2, H2, w2.cond)
        pb = self.node(n.children[0], A.flatten(w1.body), A.flatten(w2.body), B1, B2,
                       _and(psi, sync), path + "[body]")
        self.implies(_and(psi, g1, g2), pb, B1, B2, path, "while", "invariant preserved by body")
        E1, E2 = self._filter(1, H1, w1.cond, False), self._filter(2, H2, w2.cond, False)
        self.implies(_and(psi, _not(g1), _not(g2)), post, E1, E2, path, "while", "invariant and exit imply post")
        for side, w, R in ((1, w1, R1), (2, w2, R2)):
            self.lossless(side, w, R, path, "while", strict=False)
        return _and(psi, sync)

    def lossless(self, side, loop, R, path, rule, strict=True):
        worst = Fraction(0)
        for m in sorted(R, key=repr):
            mu = self.ex[side].run_dist(loop, {m: Fraction(1)})
            res = classify(mu, self.tol)
            worst = max(worst, mu.residual)
            if not res.ok and strict:
                self.log.append(Obligation(path, rule, "loop lossless", len(R), False, str(res)))
                raise Rejected(path, rule, f"loop is {res}", self.tp[side].layout.as_dict(m))
        self.log.append(Obligation(path, rule, "loop lossless", len(R), True, f"residual <= {worst}",
                                   worst))

    def _one_sided_while(self, n, c, other, side, R, Ro, post, path, rule):
        w = self._shape(c, A.While, path, rule, side)
        self.expect(not other, path, rule, f"{'right' if side == 1 else 'left'} program must be skip")
        psi = self.inv(n, path)
        g = self._guard(side, w.cond)
        H = self.loop_heads(side, w, R)
        B = self._filter(side, H, w.cond)
        E = self._filter(side, H, w.cond, False)
        body = A.flatten(w.body)
        if side == 1:
            pb = self.node(n.children[0], body, [], B, Ro, psi, path + "[body]")
            self.implies(_and(psi, g), pb, B, Ro, path, rule, "invariant preserved by body")
            self.implies(_and(psi, _not(g)), post, E, Ro, path, rule, "invariant and exit imply post")
        else:
            pb = self.node(n.children[0], [], body, Ro, B, psi, path + "[body]")
            self.implies(_and(psi, g), pb, Ro, B, path, rule, "invariant preserved by body")
            self.implies(_and(psi, _not(g)), post, Ro, E, path, rule, "invariant and exit imply post")
        self.lossless(side, w, R, path, rule)
        return psi

    def rule_whilel(self, n, c1, c2, R1, R2, post, path):
        return self._one_sided_while(n, c1, c2, 1, R1, R2, post, path, "whilel")

    def rule_whiler(self, n, c1, c2, R1, R2, post, path):
        return self._one_sided_while(n, c2, c1, 2, R2, R1, post, path, "whiler")

    def rule_case(self, n, c1, c2, R1, R2, post, path):
        try:
            xi = self.assertion(str(n.args["xi"]))
        except TypeCheckError as exc:
            raise Rejected(path, "case", str(exc)) from None
        p1 = self.node(n.children[0], c1, c2, R1, R2, post, path + "[xi]")
        p2 = self.node(n.children[1], c1, c2, R1, R2, post, path + "[not xi]")
        return _and(_imp(xi, p1), _imp(_not(xi), p2))

    def rule_conseq(self, n, c1, c2, R1, R2, post, path):
        try:
            pre_s = self.assertion(str(n.args["pre"])) if "pre" in n.args else None
            post_s = self.assertion(str(n.args["post"])) if "post" in n.args else None
        except TypeCheckError as exc:
            raise Rejected(path, "conseq", str(exc)) from None
        inner_post = post
        if post_s is not None:
            X1, X2 = self.reach(1, c1, R1), self.reach(2, c2, R2)
            self.implies(post_s, post, X1, X2, path, "conseq", "strengthened post implies post")
            inner_post = post_s
        p = self.node(n.children[0], c1, c2, R1, R2, inner_post, path + "[0]")
        if pre_s is None:
            return p
        self.implies(pre_s, p, R1, R2, path, "conseq", "pre implies weakened pre")
        return pre_s

    def rule_seq(self, n, c1, c2, R1, R2, post, path):
        kids = n.children
        if "left" in n.args or "right" in n.args:
            if len(kids) != 2:
                raise Rejected(path, "seq", "explicit :left/:right split needs exactly two sub-proofs")
            cuts = [(int(n.args.get("left", 0)), int(n.args.get("right", 0)))]
        else:
            cuts = []
            for k in kids[:-1]:
                sz = size(k)
                if sz is None:
                    raise Rejected(path, "seq", f"cannot infer how many statements {k.rule} covers; "
                                   "use :left/:right")
                cuts.append(sz)
        # split the statement lists
        parts, i1, i2 = [], 0, 0
        for a, b in cuts:
            if i1 + a > len(c1) or i2 + b > len(c2):
                raise Rejected(path, "seq", "sub-proofs cover more statements than the programs have")
            parts.append((c1[i1:i1 + a], c2[i2:i2 + b]))
            i1, i2 = i1 + a, i2 + b
        parts.append((c1[i1:], c2[i2:]))
        entries = [(R1, R2)]
        for p1, p2 in parts[:-1]:
            r1, r2 = entries[-1]
            entries.append((self.reach(1, p1, r1), self.reach(2, p2, r2)))
        mid = None
        if "mid" in n.args:
            try:
                mid = self.assertion(str(n.args["mid"]))
            except TypeCheckError as exc:
                raise Rejected(path, "seq", f"midpoint: {exc}") from None
            if len(kids) != 2:
                raise Rejected(path, "seq", ":mid needs exactly two sub-proofs")
        cur = post
        for k in range(len(kids) - 1, -1, -1):
            (p1, p2), (r1, r2) = parts[k], entries[k]
            got = self.node(kids[k], p1, p2, r1, r2, cur, f"{path}[{k}]")
            if mid is not None and k == 1:
                self.implies(mid, got, r1, r2, path, "seq", "midpoint implies second leg")
                got = mid
            cur = got
        return cur

    # -- structural steps
    def rule_struct(self, n, c1, c2, R1, R2, post, path):
        new1 = self.apply_steps(1, list(c1), R1, n.args.get("left", []), path)
        new2 = self.apply_steps(2, list(c2), R2, n.args.get("right", []), path)
        return self.node(n.children[0], new1, new2, R1, R2, post, path + "[0]")

    def apply_steps(self, side, c, R, steps, path):
        for st in steps:
            if not st:
                raise Rejected(path, "struct", "empty step")
            op, args = str(st[0]), st[1:]
            where = f"{'left' if side == 1 else 'right'} {op}"
            if op == "swap":
                c = self.step_swap(c, args, path, where)
            elif op == "move":
                c = self.step_move(c, args, path, where)
            elif op == "split":
                c = self.step_split(side, c, args, path, where)
            elif op == "equiv":
                c = self.step_equiv(side, c, R, args, path, where)
            else:
                raise Rejected(path, "struct", f"unknown step {op!r}")
        return c

    def _idx(self, c, i, path, where):
        if not isinstance(i, int) or not 1 <= i <= len(c):
            raise Rejected(path, "struct", f"{where}: position {i} outside 1..{len(c)}")
        return i - 1

    def _adjacent(self, c, k, path, where):
        """Exchange statements k and k+1 (0-based) under the disjointness condition."""
        a, b = c[k], c[k + 1]
        va, _ = A.var_footprint(a)
        vb, _ = A.var_footprint(b)
        shared = va & vb
        if shared:
            raise Rejected(path, "struct", f"{where}: {SwapError(shared)}")
        self.log.append(Obligation(path, "struct", "swap disjoint", 0, True,
                                   f"{format_stmt(a).strip()[:40]} / {format_stmt(b).strip()[:40]}"))
        return c[:k] + [b, a] + c[k + 2:]

    def step_move(self, c, args, path, where):
        if len(args) != 2:
            raise Rejected(path, "struct", f"{where}: expects (move FROM TO)")
        i, j = self._idx(c, args[0], path, where), self._idx(c, args[1], path, where)
        while i > j:
            c = self._adjacent(c, i - 1, path, where)
            i -= 1
        while i < j:
            c = self._adjacent(c, i, path, where)
            i += 1
        return c

    def step_swap(self, c, args, path, where):
        if len(args) != 2:
            raise Rejected(path, "struct", f"{where}: expects (swap I J)")
        i, j = sorted((self._idx(c, args[0], path, where), self._idx(c, args[1], path, where)))
        if i == j:
            return c
        c = self.step_move(c, [j + 1, i + 1], path, where)
        return self.step_move(c, [i + 2, j + 1], path, where)

    def step_split(self, side, c, args, path, where):
        if len(args) != 2 or not isinstance(args[1], str):
            raise Rejected(path, "struct", f'{where}: expects (split I "FORMULA")')
        k = self._idx(c, args[0], path, where)
        if not isinstance(c[k], A.While):
            raise Rejected(path, "struct", f"{where}: statement {args[0]} is not a loop")
        try:
            e = check_program_expr(parse_expr(str(args[1]), relational=False), self.tp[side],
                                   consts=self.ctx.metas)
        except TypeCheckError as exc:
            raise Rejected(path, "struct", f"{where}: {exc}") from None
        if not isinstance(e.ty, BoolT):
            raise Rejected(path, "struct", f"{where}: split condition must be bool")
        s = while_split(c[k], e)
        self.log.append(Obligation(path, "struct", "while-split", 0, True, str(args[1])))
        return c[:k] + [s.first, s.second] + c[k + 1:]

    def step_equiv(self, side, c, R, args, path, where):
        if len(args) == 1:
            i, j, code = 1, len(c), args[0]
        elif len(args) == 3:
            i, j, code = args
        else:
            raise Rejected(path, "struct", f'{where}: expects (equiv "STMTS") or (equiv I J "STMTS")')
        if len(c) == 0:
            lo, hi = 0, 0
        else:
            lo, hi = self._idx(c, i, path, where), self._idx(c, j, path, where) + 1
        try:
            new = check_stmts(str(code), self.tp[side])
        except Exception as exc:
            raise Rejected(path, "struct", f"{where}: {exc}") from None
        seeds = self.reach(side, c[:lo], R)
        # ground instances of one family share programs, so the verdict is reused
        key = (self.tp[side].name, repr(sorted(self.tp[side].consts.items())), tuple(c[lo:hi]), new,
               frozenset(seeds), self.fuel)
        if key not in _EQUIV_CACHE:
            if len(_EQUIV_CACHE) > 256:
                _EQUIV_CACHE.clear()
            _EQUIV_CACHE[key] = semantic_equiv(self.tp[side], A.seq(c[lo:hi]), new, seeds,
                                               fuel=self.fuel, budget=self.budget)
        ok, wit = _EQUIV_CACHE[key]
        self.log.append(Obligation(path, "struct", "semantic equivalence", len(seeds), ok,
                                   "" if ok else f"differs from state {wit}"))
        if not ok:
            raise Rejected(path, "struct", f"{where}: replacement is not equivalent", wit)
        return c[:lo] + A.flatten(new) + c[hi:]


_EQUIV_CACHE: dict = {}

SIZES = {"assg": (1, 1), "rand": (1, 1), "cond": (1, 1), "while": (1, 1),
         "assgl": (1, 0), "randl": (1, 0), "condl": (1, 0), "whilel": (1, 0),
         "assgr": (0, 1), "randr": (0, 1), "condr": (0, 1), "whiler": (0, 1), "skip": (0, 0)}


def size(n: Node):
    """Statements covered on each side, when it follows from the rule alone."""
    if "size" in n.args:
        a, b = n.args["size"]
        return int(a), int(b)
    if n.rule in SIZES:
        return SIZES[n.rule]
    if n.rule in ("conseq", "case"):
        return size(n.children[0])
    if n.rule == "seq" and "left" not in n.args and "right" not in n.args:
        total = (0, 0)
        for k in n.children:
            s = size(k)
            if s is None:
                return None
            total = (total[0] + s[0], total[1] + s[1])
        return total
    return None


def check_proof(j: Judgment, script: Node, fuel: int = DEFAULT_FUEL, tol=Fraction(1, 2 ** 30),
                budget: int = 10 ** 7, seeds=None) -> Verdict:
    return Checker(j, fuel, tol, budget, seeds).run(script)
