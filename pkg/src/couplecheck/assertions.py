"""Relational assertions: evaluation, substitution and implication checking.

Assertions are typed expressions whose program variables carry a side tag.
Meta-parameters either have a fixed value (typed as literals) or are free,
in which case they are bound names ranging over a finite type and supplied
through an environment when evaluating.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .lang import ast as A
from .lang.evaluate import ExprError, compile_expr
from .lang.parser import parse_expr
from .lang.typecheck import TypedProgram, check_assertion
from .lang.types import TypeExpr

DEFAULT_BUDGET = 10 ** 7


class BudgetExceeded(Exception):
    """An enumeration would visit more assignments than allowed."""

    def __init__(self, needed, budget):
        self.needed, self.budget = needed, budget
        super().__init__(f"enumeration needs {needed} assignments, budget is {budget}")


@dataclass
class RelContext:
    """Signature of an assertion: the two programs and the meta-parameters."""

    left: TypedProgram
    right: TypedProgram
    metas: dict = field(default_factory=dict)       # name -> (value, type), fixed
    meta_vars: dict = field(default_factory=dict)   # name -> type, free (enumerated)

    @property
    def layouts(self):
        return {1: self.left.layout.slots, 2: self.right.layout.slots, None: self.left.layout.slots}

    @property
    def funcs(self):
        return {**self.left.funcs, **self.right.funcs}

    def side(self, tag) -> TypedProgram:
        return self.right if tag == 2 else self.left

    def with_metas(self, values: dict) -> "RelContext":
        metas = dict(self.metas)
        free = dict(self.meta_vars)
        for k, v in values.items():
            metas[k] = (v, free.pop(k))
        return RelContext(self.left, self.right, metas, free)


@dataclass
class Assertion:
    expr: A.Expr   # typed
    ctx: RelContext

    def __post_init__(self):
        self._fn = compile_expr(self.expr, self.ctx.layouts, self.ctx.funcs)

    def __str__(self):
        from .lang.printer import format_expr
        return format_expr(self.expr)

    def eval(self, m1, m2, env: dict | None = None) -> bool:
        """Truth on a pair of states (full tuples or name->value dicts)."""
        s1 = _state(self.ctx.left, m1)
        s2 = _state(self.ctx.right, m2)
        return bool(self._fn(s1, s2, env or {}))

    def eval_raw(self, s1: tuple, s2: tuple, env: dict):
        return self._fn(s1, s2, env)

    def free_vars(self) -> set:
        return tagged_vars(self.expr)

    def free_metas(self) -> set:
        return free_bound(self.expr) & set(self.ctx.meta_vars)


def _state(tp: TypedProgram, m):
    from .semantics import full_state
    return full_state(tp, m)


def parse_assertion(text: str | A.Expr, ctx: RelContext, bound: dict | None = None) -> Assertion:
    e = parse_expr(text, relational=True) if isinstance(text, str) else text
    b = dict(ctx.meta_vars)
    b.update(bound or {})
    te = check_assertion(e, ctx.left, ctx.right, ctx.metas, b)
    return Assertion(te, ctx)


def eval_assertion(phi: Assertion, m1, m2, env: dict | None = None) -> bool:
    return phi.eval(m1, m2, env)


# --- traversal ------------------------------------------------------------------------------

def map_children(e: A.Expr, f) -> A.Expr:
    """Rebuild ``e`` with ``f`` applied to each immediate subexpression."""
    if isinstance(e, A.Unary):
        return replace(e, arg=f(e.arg))
    if isinstance(e, A.Binary):
        return replace(e, left=f(e.left), right=f(e.right))
    if isinstance(e, A.Cond):
        return replace(e, cond=f(e.cond), then=f(e.then), else_=f(e.else_))
    if isinstance(e, (A.TupleE, A.ListE)):
        return replace(e, items=tuple(f(x) for x in e.items))
    if isinstance(e, A.Index):
        return replace(e, base=f(e.base), index=f(e.index))
    if isinstance(e, A.Proj):
        return replace(e, base=f(e.base))
    if isinstance(e, A.Call):
        return replace(e, args=tuple(f(x) for x in e.args))
    if isinstance(e, (A.Tagged, A.Labeled)):
        return replace(e, expr=f(e.expr))
    if isinstance(e, A.Quant):
        dom = tuple(f(x) for x in e.domain) if isinstance(e.domain, tuple) else e.domain
        return replace(e, domain=dom, body=f(e.body))
    if isinstance(e, A.FCoupled):
        return replace(e, f=f(e.f))
    return e


def walk(e: A.Expr):
    yield e
    out = []
    map_children(e, lambda c: out.append(c) or c)
    for c in out:
        yield from walk(c)


def tagged_vars(e: A.Expr) -> set:
    return {(x.name, x.tag) for x in walk(e) if isinstance(x, A.Var)}


def free_bound(e: A.Expr, bound=frozenset()) -> set:
    if isinstance(e, A.Bound):
        return set() if e.name in bound else {e.name}
    if isinstance(e, A.Quant):
        out = free_bound(e.body, bound | {e.var})
        if isinstance(e.domain, tuple):
            for d in e.domain:
                out |= free_bound(d, bound)
        return out
    if isinstance(e, A.FCoupled):
        return free_bound(e.f, bound | {e.var})
    out: set = set()
    map_children(e, lambda c: out.update(free_bound(c, bound)) or c)
    return out


def retag(e: A.Expr, side: int) -> A.Expr:
    """Tag the untagged program variables of a program expression with ``side``."""
    if isinstance(e, A.Var) and e.tag is None:
        return replace(e, tag=side)
    return map_children(e, lambda c: retag(c, side))


_fresh = itertools.count()


def rename_bound(e: A.Expr, old: str, new: str) -> A.Expr:
    if isinstance(e, A.Bound):
        return replace(e, name=new) if e.name == old else e
    if isinstance(e, (A.Quant, A.FCoupled)) and e.var == old:
        if isinstance(e, A.Quant) and isinstance(e.domain, tuple):
            return replace(e, domain=tuple(rename_bound(d, old, new) for d in e.domain))
        return e
    return map_children(e, lambda c: rename_bound(c, old, new))


def subst_many(phi: A.Expr, mapping: dict) -> A.Expr:
    """Simultaneous capture-avoiding substitution of typed expressions for
    tagged variables: ``mapping`` maps (name, tag) to a replacement."""
    if not mapping:
        return phi
    captured: set = set()
    for r in mapping.values():
        captured |= free_bound(r)

    def go(e):
        if isinstance(e, A.Var):
            key = (e.name, e.tag)
            return mapping.get(key, e)
        if isinstance(e, (A.Quant, A.FCoupled)) and e.var in captured:
            new = f"{e.var}_{next(_fresh)}"
            body_field = "body" if isinstance(e, A.Quant) else "f"
            e = replace(e, var=new, **{body_field: rename_bound(getattr(e, body_field), e.var, new)})
        return map_children(e, go)

    return go(phi)


def subst(phi: A.Expr, side: int, x: str, e: A.Expr, index: A.Expr | None = None) -> A.Expr:
    """phi[e<side>/x<side>]; with ``index``, substitutes ``update(x, index, e)``.

    ``e`` and ``index`` are typed program expressions (untagged).
    """
    var_ty = _var_type(phi, x, side)
    if index is not None:
        base = A.Var(x, side, ty=var_ty)
        r = A.Call("update", (base, retag(index, side), retag(e, side)), ty=var_ty)
    else:
        r = retag(e, side)
    return subst_many(phi, {(x, side): r})


def _var_type(phi, x, side):
    for n in walk(phi):
        if isinstance(n, A.Var) and n.name == x and n.tag == side:
            return n.ty
    return None


# --- implication -------------------------------------------------------------------------------

@dataclass
class Valid:
    checked: int

    ok = True

    def __str__(self):
        return f"valid ({self.checked} assignments checked)"


@dataclass
class CounterExample:
    m1: dict
    m2: dict
    env: dict

    ok = False

    def __str__(self):
        parts = [f"{k}{{1}} = {v!r}" for k, v in self.m1.items()]
        parts += [f"{k}{{2}} = {v!r}" for k, v in self.m2.items()]
        parts += [f"{k} = {v!r}" for k, v in self.env.items()]
        return "counterexample: " + ", ".join(parts)


def check_implies(phi: Assertion, psi: Assertion, budget: int = DEFAULT_BUDGET,
                  base1: tuple | None = None, base2: tuple | None = None):
    """phi ==> psi for all values of their free tagged variables and free metas.

    Variables not free in either formula keep their values from the base
    states (default: initial states).
    """
    ctx = phi.ctx
    keys = sorted(phi.free_vars() | psi.free_vars(), key=lambda k: (k[1] or 0, k[0]))
    metas = sorted(phi.free_metas() | psi.free_metas())
    carriers = []
    size = 1
    for name, tag in keys:
        t = ctx.side(tag).layout.type_of(name)
        carriers.append(list(t.values()))
        size *= len(carriers[-1])
    for m in metas:
        carriers.append(list(ctx.meta_vars[m].values()))
        size *= len(carriers[-1])
    if size > budget:
        raise BudgetExceeded(size, budget)
    s1 = list(base1 if base1 is not None else ctx.left.init)
    s2 = list(base2 if base2 is not None else ctx.right.init)
    slots = []
    for name, tag in keys:
        slots.append((tag, ctx.side(tag).layout.slots[name]))
    n = 0
    for combo in itertools.product(*carriers):
        n += 1
        for (tag, i), v in zip(slots, combo):
            (s2 if tag == 2 else s1)[i] = v
        env = dict(zip(metas, combo[len(keys):]))
        t1, t2 = tuple(s1), tuple(s2)
        try:
            if not phi.eval_raw(t1, t2, env):
                continue
            good = psi.eval_raw(t1, t2, env)
        except ExprError:
            good = False
        if not good:
            m1 = {k: v for (k, tag), v in zip(keys, combo) if tag != 2}
            m2 = {k: v for (k, tag), v in zip(keys, combo) if tag == 2}
            return CounterExample(m1, m2, env)
    return Valid(n)


def check_valid(phi: Assertion, budget: int = DEFAULT_BUDGET):
    top = Assertion(A.Lit(True, ty=phi.expr.ty), phi.ctx)
    return check_implies(top, phi, budget)


# --- cross-equality ------------------------------------------------------------------------------

def eqmem(names, p: int | None = None, q: int | None = None) -> A.Expr:
    """EqMem over ``names``; with (p, q), cross-equality of all copies x@i{1} = x@j{2}."""
    atoms = []
    for x in names:
        if p is None:
            atoms.append(A.Binary("=", A.Name(x, 1), A.Name(x, 2)))
            continue
        for i in range(1, p + 1):
            for j in range(1, (q or p) + 1):
                atoms.append(A.Binary("=", A.Name(f"{x}@{i}", 1), A.Name(f"{x}@{j}", 2)))
    return A.conj(atoms)
