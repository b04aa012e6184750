"""Compilation of typed expressions to Python closures.

A compiled expression is called as ``f(m1, m2, bound)``: ``m1``/``m2`` are the
left/right states (tuples laid out by a ``Layout``), ``bound`` maps names bound
by quantifiers, bijections or function tables to values. Untagged variables
read ``m1``.
"""
from __future__ import annotations

from fractions import Fraction

from . import ast as A
from .types import AnyListT, EnumT, IntT, ListT, RangeT, TupleT, TypeExpr, ZModT, BoolT


class ExprError(Exception):
    """Runtime failure of a partial operator (index, division, range)."""


def coerce(v, t: TypeExpr):
    """Convert ``v`` into the carrier of ``t`` or raise ExprError."""
    if isinstance(t, ZModT):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ExprError(f"{v!r} is not an integer")
        return v % t.n
    if isinstance(t, (RangeT, IntT)):
        if isinstance(v, bool) or not isinstance(v, int) or not t.contains(v):
            raise ExprError(f"value {v!r} outside {t}")
        return v
    if isinstance(t, BoolT):
        if not isinstance(v, bool):
            raise ExprError(f"{v!r} is not a boolean")
        return v
    if isinstance(t, EnumT):
        if v not in t.labels:
            raise ExprError(f"{v!r} is not a label of {t}")
        return v
    if isinstance(t, TupleT):
        if not isinstance(v, tuple) or len(v) != len(t.elems):
            raise ExprError(f"{v!r} does not fit {t}")
        return tuple(coerce(x, et) for x, et in zip(v, t.elems))
    if isinstance(t, ListT):
        if not isinstance(v, tuple) or len(v) > t.max_len:
            raise ExprError(f"list {v!r} longer than {t.max_len}")
        return tuple(coerce(x, t.elem) for x in v)
    return v


def normalize(v, t: TypeExpr | None):
    """Reduce modular components so values of joined types compare correctly."""
    if isinstance(t, ZModT):
        return v % t.n
    if isinstance(t, TupleT) and isinstance(v, tuple):
        return tuple(normalize(x, et) for x, et in zip(v, t.elems))
    if isinstance(t, (ListT, AnyListT)) and isinstance(v, tuple) and t.elem is not None:
        return tuple(normalize(x, t.elem) for x in v)
    return v


def _has_zmod(t) -> bool:
    if isinstance(t, ZModT):
        return True
    if isinstance(t, TupleT):
        return any(_has_zmod(e) for e in t.elems)
    if isinstance(t, (ListT, AnyListT)):
        return _has_zmod(t.elem)
    return False


def dist_support(d: A.Dist, target: TypeExpr | None = None) -> tuple:
    """Support of a typed (constant) distribution as ``((value, mass), ...)``."""
    if isinstance(d, A.UniformType):
        vals = list(d.type.values())
    elif isinstance(d, A.UniformSet):
        vals = [x.value for x in d.elems]
    elif isinstance(d, A.Bernoulli):
        p = d.p.value
        return ((True, p), (False, 1 - p))
    else:
        raise TypeError(d)
    if target is not None:
        vals = [coerce(v, target) for v in vals]
    q = Fraction(1, len(vals))
    return tuple((v, q) for v in vals)


def _binop(op, e: A.Binary, lf, rf):
    if op == "&&":
        return lambda m1, m2, b: lf(m1, m2, b) and rf(m1, m2, b)
    if op == "||":
        return lambda m1, m2, b: lf(m1, m2, b) or rf(m1, m2, b)
    if op == "==>":
        return lambda m1, m2, b: (not lf(m1, m2, b)) or rf(m1, m2, b)
    if op == "<==>":
        return lambda m1, m2, b: lf(m1, m2, b) == rf(m1, m2, b)
    if op == "^":
        return lambda m1, m2, b: lf(m1, m2, b) != rf(m1, m2, b)
    if op in ("+", "-", "*"):
        n = e.ty.n if isinstance(e.ty, ZModT) else None
        if op == "+":
            f = lambda m1, m2, b: lf(m1, m2, b) + rf(m1, m2, b)
        elif op == "-":
            f = lambda m1, m2, b: lf(m1, m2, b) - rf(m1, m2, b)
        else:
            f = lambda m1, m2, b: lf(m1, m2, b) * rf(m1, m2, b)
        if n is None:
            return f
        return lambda m1, m2, b: f(m1, m2, b) % n
    if op in ("/", "%"):
        def divmod_(m1, m2, b):
            x, y = lf(m1, m2, b), rf(m1, m2, b)
            if y == 0:
                raise ExprError("division by zero")
            return x // y if op == "/" else x % y
        return divmod_
    if op in ("=", "!="):
        joined = _join_for_compare(e.left.ty, e.right.ty)
        if _has_zmod(joined):
            f = lambda m1, m2, b: normalize(lf(m1, m2, b), joined) == normalize(rf(m1, m2, b), joined)
        else:
            f = lambda m1, m2, b: lf(m1, m2, b) == rf(m1, m2, b)
        if op == "=":
            return f
        return lambda m1, m2, b: not f(m1, m2, b)
    if op in ("<", "<=", ">", ">="):
        joined = _join_for_compare(e.left.ty, e.right.ty)
        if isinstance(joined, ZModT):
            n = joined.n
            lf0, rf0 = lf, rf
            lf = lambda m1, m2, b: lf0(m1, m2, b) % n
            rf = lambda m1, m2, b: rf0(m1, m2, b) % n
        if op == "<":
            return lambda m1, m2, b: lf(m1, m2, b) < rf(m1, m2, b)
        if op == "<=":
            return lambda m1, m2, b: lf(m1, m2, b) <= rf(m1, m2, b)
        if op == ">":
            return lambda m1, m2, b: lf(m1, m2, b) > rf(m1, m2, b)
        return lambda m1, m2, b: lf(m1, m2, b) >= rf(m1, m2, b)
    if op == "++":
        return lambda m1, m2, b: tuple(lf(m1, m2, b)) + tuple(rf(m1, m2, b))
    if op == "::":
        return lambda m1, m2, b: (lf(m1, m2, b),) + tuple(rf(m1, m2, b))
    raise ValueError(f"unknown operator {op}")


def _join_for_compare(t1, t2):
    from .typecheck import unify
    return unify(t1, t2)


def _index(bf, xf):
    def get(m1, m2, b):
        seq, i = bf(m1, m2, b), xf(m1, m2, b)
        if not 0 <= i < len(seq):
            raise ExprError(f"index {i} out of range for length {len(seq)}")
        return seq[i]
    return get


def _update(xf, if_, vf, elem_ty):
    def upd(m1, m2, b):
        seq, i, v = xf(m1, m2, b), if_(m1, m2, b), vf(m1, m2, b)
        if not 0 <= i < len(seq):
            raise ExprError(f"index {i} out of range for length {len(seq)}")
        if elem_ty is not None:
            v = coerce(v, elem_ty)
        return seq[:i] + (v,) + seq[i + 1:]
    return upd


def _pow(bf, ef, n):
    def p(m1, m2, b):
        x, k = bf(m1, m2, b), ef(m1, m2, b)
        if k < 0:
            raise ExprError("negative exponent")
        return pow(x, k, n) if n else x ** k
    return p


def compile_expr(e: A.Expr, layouts: dict, funcs: dict | None = None):
    """Compile a typed expression. ``layouts`` maps side tag (None/1/2) to name->slot."""
    funcs = funcs or {}

    def go(e):
        if isinstance(e, A.Lit):
            v = e.value
            return lambda m1, m2, b: v
        if isinstance(e, A.Var):
            tag = e.tag
            slots = layouts.get(tag) if tag is not None else layouts.get(None, layouts.get(1))
            if slots is None or e.name not in slots:
                raise KeyError(f"variable {e.name!r} not in layout for side {tag}")
            i = slots[e.name]
            if tag == 2:
                return lambda m1, m2, b: m2[i]
            return lambda m1, m2, b: m1[i]
        if isinstance(e, A.Bound):
            n = e.name
            return lambda m1, m2, b: b[n]
        if isinstance(e, A.Unary):
            af = go(e.arg)
            if e.op == "!":
                return lambda m1, m2, b: not af(m1, m2, b)
            if isinstance(e.ty, ZModT):
                n = e.ty.n
                return lambda m1, m2, b: (-af(m1, m2, b)) % n
            return lambda m1, m2, b: -af(m1, m2, b)
        if isinstance(e, A.Binary):
            return _binop(e.op, e, go(e.left), go(e.right))
        if isinstance(e, A.Cond):
            cf, tf, ff = go(e.cond), go(e.then), go(e.else_)
            return lambda m1, m2, b: tf(m1, m2, b) if cf(m1, m2, b) else ff(m1, m2, b)
        if isinstance(e, (A.TupleE, A.ListE)):
            fs = [go(x) for x in e.items]
            return lambda m1, m2, b: tuple(f(m1, m2, b) for f in fs)
        if isinstance(e, A.Index):
            return _index(go(e.base), go(e.index))
        if isinstance(e, A.Proj):
            bf, k = go(e.base), e.field_no
            return lambda m1, m2, b: bf(m1, m2, b)[k]
        if isinstance(e, A.Call):
            return compile_call(e, [go(x) for x in e.args], funcs)
        if isinstance(e, A.Quant):
            return _quant(e, go)
        if isinstance(e, A.Labeled):
            return go(e.expr)
        if isinstance(e, A.FCoupled):
            return _fcoupled(e, go(e.f))
        if isinstance(e, (A.Name, A.Tagged)):
            raise TypeError("compile_expr needs a typechecked expression")
        raise TypeError(f"cannot compile {e!r}")

    return go(e)


def compile_call(e: A.Call, fs, funcs):
    name = e.func
    if name == "len":
        f = fs[0]
        return lambda m1, m2, b: len(f(m1, m2, b))
    if name == "pow":
        n = e.ty.n if isinstance(e.ty, ZModT) else None
        return _pow(fs[0], fs[1], n)
    if name == "bit":
        jf, kf = fs
        return lambda m1, m2, b: (jf(m1, m2, b) >> kf(m1, m2, b)) & 1 == 1
    if name == "update":
        elem = None
        if isinstance(e.ty, TupleT) and e.ty.elems:
            elem = e.ty.elems[0]
        elif isinstance(e.ty, ListT):
            elem = e.ty.elem
        return _update(fs[0], fs[1], fs[2], elem)
    if name == "repeat":
        vf, n = fs[0], len(e.ty.elems)
        return lambda m1, m2, b: (vf(m1, m2, b),) * n
    if name == "toint":
        f = fs[0]
        return lambda m1, m2, b: f(m1, m2, b)
    table = funcs[name]

    def call(m1, m2, b):
        args = tuple(f(m1, m2, b) for f in fs)
        return table.apply(args)
    return call


def _quant(e: A.Quant, go):
    body = go(e.body)
    var = e.var
    if isinstance(e.domain, tuple):
        dfs = [go(x) for x in e.domain]

        def values(m1, m2, b):
            return [f(m1, m2, b) for f in dfs]
    else:
        vals = list(e.domain.values())

        def values(m1, m2, b):
            return vals
    if e.kind == "forall":
        def forall(m1, m2, b):
            for v in values(m1, m2, b):
                if not body(m1, m2, {**b, var: v}):
                    return False
            return True
        return forall

    def exists(m1, m2, b):
        for v in values(m1, m2, b):
            if body(m1, m2, {**b, var: v}):
                return True
        return False
    return exists


def _fcoupled(e: A.FCoupled, ff):
    supp1, supp2 = dict(e.g1), dict(e.g2)
    var = e.var

    def check(m1, m2, b):
        return f_coupled(supp1, supp2, lambda v: ff(m1, m2, {**b, var: v}))
    return check


def f_coupled(mu1: dict, mu2: dict, f) -> bool:
    """``f`` is a bijection supp(mu1) -> supp(mu2) with mu1(x) = mu2(f(x))."""
    if len(mu1) != len(mu2):
        return False
    seen = set()
    for x, p in mu1.items():
        try:
            y = f(x)
        except ExprError:
            return False
        if y in seen or mu2.get(y) != p:
            return False
        seen.add(y)
    return True
