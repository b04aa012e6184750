"""Name resolution and typing for programs and relational assertions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import ast as A
from .evaluate import ExprError, coerce, compile_expr
from .types import (AnyIntT, AnyListT, BoolT, EnumT, IntT, ListT, RangeT, RatT,
                    TupleT, TypeExpr, ZModT, is_intlike, is_finite)

MAX_TABLE = 1 << 16

BUILTINS = {"len", "pow", "bit", "update", "repeat", "toint"}


class TypeCheckError(Exception):
    """One or more static errors; ``errors`` lists them with locations."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _where(node) -> str:
    loc = getattr(node, "loc", None)
    return f"line {loc[0]}, col {loc[1]}: " if loc else ""


class _Fail(Exception):
    pass


def unify(t1, t2):
    """Least common type of two expression types, or None when incompatible."""
    if t1 is None:
        return t2
    if t2 is None or t1 == t2:
        return t1
    if isinstance(t1, ZModT) and is_intlike(t2) and not isinstance(t2, ZModT):
        return t1
    if isinstance(t2, ZModT) and is_intlike(t1) and not isinstance(t1, ZModT):
        return t2
    if isinstance(t1, ZModT) or isinstance(t2, ZModT):
        return None
    if is_intlike(t1) and is_intlike(t2):
        return AnyIntT()
    if isinstance(t1, TupleT) and isinstance(t2, TupleT):
        if len(t1.elems) != len(t2.elems):
            return None
        out = [unify(a, b) for a, b in zip(t1.elems, t2.elems)]
        return None if any(x is None for x in out) else TupleT(tuple(out))
    if isinstance(t1, (ListT, AnyListT)) and isinstance(t2, (ListT, AnyListT)):
        if t1.elem is None or t2.elem is None:
            return AnyListT(t1.elem if t2.elem is None else t2.elem)
        el = unify(t1.elem, t2.elem)
        return None if el is None else AnyListT(el)
    return None


def assignable(target: TypeExpr, source) -> bool:
    """Statically plausible: values of ``source`` may fit ``target`` (checked at runtime)."""
    if isinstance(source, (ListT, AnyListT)) and isinstance(target, TupleT):
        return False
    return unify(target, source) is not None


# --- function tables ---------------------------------------------------------------

@dataclass
class FuncTable:
    name: str
    arg_types: tuple
    ret: TypeExpr
    table: dict

    def apply(self, args):
        try:
            key = tuple(coerce(a, t) for a, t in zip(args, self.arg_types))
        except ExprError:
            raise ExprError(f"{self.name}{args!r} outside its domain") from None
        return self.table[key]


# --- scopes --------------------------------------------------------------------------

@dataclass
class Scope:
    """Everything a name may resolve to.

    ``sides`` maps a side tag to its variable types. In relational mode the
    tags are 1 and 2 and every program variable must carry a tag; otherwise
    the single key is None.
    """

    sides: dict
    consts: dict = field(default_factory=dict)  # name -> (value, type)
    funcs: dict = field(default_factory=dict)   # name -> FuncTable
    relational: bool = False

    def const_eval(self, e: A.Expr):
        te = check_expr(e, self, bound={})
        f = compile_expr(te, {}, self.funcs)
        try:
            return f((), (), {}), te.ty
        except ExprError as exc:
            raise _Fail(f"{_where(e)}{exc}") from None


def _lit_type(v):
    if isinstance(v, bool):
        return BoolT()
    if isinstance(v, int):
        return AnyIntT()
    if isinstance(v, Fraction):
        return RatT()
    raise _Fail(f"unsupported literal {v!r}")


def resolve_type(ts, scope: Scope) -> TypeExpr:
    if isinstance(ts, TypeExpr):
        return ts
    try:
        if isinstance(ts, A.TBool):
            return BoolT()
        if isinstance(ts, A.TRat):
            return RatT()
        if isinstance(ts, A.TEnum):
            return EnumT(ts.labels)
        if isinstance(ts, A.TRange):
            return RangeT(_size(ts.size, scope))
        if isinstance(ts, A.TZMod):
            return ZModT(_size(ts.modulus, scope))
        if isinstance(ts, A.TInt):
            return IntT(_size(ts.lo, scope), _size(ts.hi, scope))
        if isinstance(ts, A.TTuple):
            return TupleT(tuple(resolve_type(t, scope) for t in ts.elems))
        if isinstance(ts, A.TArray):
            n = _size(ts.length, scope)
            if n < 0:
                raise _Fail("negative array length")
            return TupleT((resolve_type(ts.elem, scope),) * n)
        if isinstance(ts, A.TList):
            return ListT(_size(ts.max_len, scope), resolve_type(ts.elem, scope))
    except ValueError as exc:
        raise _Fail(f"{_where(ts)}{exc}") from None
    raise _Fail(f"{_where(ts)}unknown type {ts!r}")


def _size(e, scope) -> int:
    v, _ = scope.const_eval(e)
    if isinstance(v, bool) or not isinstance(v, int):
        raise _Fail(f"{_where(e)}type size must be an integer")
    return v


def enum_labels(ts, acc: dict):
    """Collect enum labels occurring in a type syntax tree."""
    if isinstance(ts, A.TEnum):
        t = EnumT(ts.labels)
        for lab in ts.labels:
            acc.setdefault(lab, (lab, t))
    elif isinstance(ts, A.TTuple):
        for x in ts.elems:
            enum_labels(x, acc)
    elif isinstance(ts, (A.TArray, A.TList)):
        enum_labels(ts.elem, acc)


# --- expressions -----------------------------------------------------------------------

_ARITH = {"+", "-", "*"}
_INTDIV = {"/", "%"}
_CMP = {"<", "<=", ">", ">="}
_LOGIC = {"&&", "||", "^", "==>", "<==>"}


def _need(cond, node, msg):
    if not cond:
        raise _Fail(f"{_where(node)}{msg}")


def _elem_type(t):
    if isinstance(t, (ListT, AnyListT)):
        return t.elem
    if isinstance(t, TupleT) and t.elems and len(set(t.elems)) == 1:
        return t.elems[0]
    if isinstance(t, TupleT) and t.elems:
        el = t.elems[0]
        for x in t.elems[1:]:
            el = unify(el, x)
        return el
    return None


def check_expr(e: A.Expr, scope: Scope, bound: dict, tag=None) -> A.Expr:
    """Resolve names in ``e`` and annotate every node with its type."""
    def go(x, tag=tag, bound=bound):
        return check_expr(x, scope, bound, tag)

    if isinstance(e, A.Lit):
        return replace(e, ty=e.ty or _lit_type(e.value))
    if isinstance(e, A.Bound):
        _need(e.name in bound, e, f"unbound variable {e.name!r}")
        return replace(e, ty=bound[e.name])
    if isinstance(e, A.Var):
        t = e.tag if e.tag is not None else tag
        if t is None and not scope.relational:
            t = None
        side = scope.sides.get(t if scope.relational else None, {})
        _need(e.name in side, e, f"unbound variable {e.name!r}")
        return A.Var(e.name, t if scope.relational else e.tag, ty=side[e.name], loc=e.loc)
    if isinstance(e, A.Name):
        return _check_name(e, scope, bound, tag)
    if isinstance(e, A.Tagged):
        _need(scope.relational, e, "side tags are only allowed in assertions")
        return go(e.expr, tag=e.side)
    if isinstance(e, A.Labeled):
        inner = go(e.expr)
        return replace(e, expr=inner, ty=inner.ty)
    if isinstance(e, A.Unary):
        a = go(e.arg)
        if e.op == "!":
            _need(isinstance(a.ty, BoolT), e, f"'!' expects bool, got {a.ty}")
            return replace(e, arg=a, ty=BoolT())
        _need(is_intlike(a.ty) or isinstance(a.ty, ZModT), e, f"'-' expects a number, got {a.ty}")
        return replace(e, arg=a, ty=a.ty if isinstance(a.ty, ZModT) else AnyIntT())
    if isinstance(e, A.Binary):
        return _check_binary(e, go(e.left), go(e.right))
    if isinstance(e, A.Cond):
        c, a, b = go(e.cond), go(e.then), go(e.else_)
        _need(isinstance(c.ty, BoolT), e, f"condition must be bool, got {c.ty}")
        t = unify(a.ty, b.ty)
        _need(t is not None, e, f"type mismatch between branches: {a.ty} and {b.ty}")
        return replace(e, cond=c, then=a, else_=b, ty=t)
    if isinstance(e, A.TupleE):
        items = tuple(go(x) for x in e.items)
        return replace(e, items=items, ty=TupleT(tuple(x.ty for x in items)))
    if isinstance(e, A.ListE):
        items = tuple(go(x) for x in e.items)
        el = None
        for x in items:
            el2 = unify(el, x.ty)
            _need(el2 is not None, e, f"type mismatch in list: {el} and {x.ty}")
            el = el2
        return replace(e, items=items, ty=AnyListT(el))
    if isinstance(e, A.Index):
        b, i = go(e.base), go(e.index)
        _need(isinstance(b.ty, (TupleT, ListT, AnyListT)), e, f"cannot index a value of type {b.ty}")
        _need(is_intlike(i.ty), e, f"index must be an integer, got {i.ty}")
        if isinstance(b.ty, TupleT) and isinstance(i, A.Lit):
            _need(0 <= i.value < len(b.ty.elems), e, f"index {i.value} out of range")
            return replace(e, base=b, index=i, ty=b.ty.elems[i.value])
        return replace(e, base=b, index=i, ty=_elem_type(b.ty))
    if isinstance(e, A.Proj):
        b = go(e.base)
        _need(isinstance(b.ty, TupleT) and 0 <= e.field_no < len(b.ty.elems), e,
              f"no component {e.field_no} in {b.ty}")
        return replace(e, base=b, ty=b.ty.elems[e.field_no])
    if isinstance(e, A.Call):
        return _check_call(e, tuple(go(x) for x in e.args), scope)
    if isinstance(e, A.Quant):
        if isinstance(e.domain, tuple):
            dom = tuple(go(x) for x in e.domain)
            vt = None
            for x in dom:
                vt = unify(vt, x.ty)
                _need(vt is not None, e, "type mismatch in quantifier domain")
        else:
            dom = resolve_type(e.domain, scope)
            _need(is_finite(dom), e, f"quantifier over infinite type {dom}")
            vt = dom
        body = go(e.body, bound={**bound, e.var: vt})
        _need(isinstance(body.ty, BoolT), e, "quantifier body must be bool")
        return replace(e, domain=dom, body=body, ty=BoolT())
    if isinstance(e, A.FCoupled):
        f = go(e.f, bound={**bound, e.var: e.var_ty})
        return replace(e, f=f, ty=BoolT())
    raise _Fail(f"{_where(e)}unexpected expression {e!r}")


def _check_name(e: A.Name, scope: Scope, bound: dict, tag):
    t = e.tag if e.tag is not None else tag
    if e.id in bound and e.tag is None:
        return A.Bound(e.id, ty=bound[e.id], loc=e.loc)
    if scope.relational:
        if t is not None:
            side = scope.sides.get(t, {})
            if e.id in side:
                return A.Var(e.id, t, ty=side[e.id], loc=e.loc)
            _need(e.id in scope.consts, e, f"unbound variable {e.id}{{{t}}}")
        elif any(e.id in s for s in scope.sides.values()) and e.id not in scope.consts:
            raise _Fail(f"{_where(e)}program variable {e.id!r} needs a side tag {{1}} or {{2}}")
    else:
        side = scope.sides.get(None, {})
        _need(e.tag is None, e, "side tags are only allowed in assertions")
        if e.id in side:
            return A.Var(e.id, None, ty=side[e.id], loc=e.loc)
    if e.id in scope.consts:
        v, ty = scope.consts[e.id]
        return A.Lit(v, ty=ty, loc=e.loc)
    raise _Fail(f"{_where(e)}unbound variable {e.id!r}")


def _check_binary(e: A.Binary, l: A.Expr, r: A.Expr):
    op, lt, rt = e.op, l.ty, r.ty
    out = replace(e, left=l, right=r)
    if op in _LOGIC:
        _need(isinstance(lt, BoolT) and isinstance(rt, BoolT), e,
              f"type mismatch: '{op}' expects bool operands, got {lt} and {rt}")
        return replace(out, ty=BoolT())
    if op in _ARITH:
        _need((is_intlike(lt) or isinstance(lt, ZModT)) and (is_intlike(rt) or isinstance(rt, ZModT)),
              e, f"type mismatch: '{op}' expects numbers, got {lt} and {rt}")
        t = unify(lt, rt)
        _need(t is not None, e, f"type mismatch: {lt} {op} {rt}")
        return replace(out, ty=t if isinstance(t, ZModT) else AnyIntT())
    if op in _INTDIV:
        _need(is_intlike(lt) and is_intlike(rt), e,
              f"type mismatch: '{op}' expects integers, got {lt} and {rt}")
        return replace(out, ty=AnyIntT())
    if op in ("=", "!="):
        _need(unify(lt, rt) is not None, e, f"type mismatch: cannot compare {lt} with {rt}")
        return replace(out, ty=BoolT())
    if op in _CMP:
        t = unify(lt, rt)
        _need(t is not None and (is_intlike(t) or isinstance(t, ZModT)), e,
              f"type mismatch: '{op}' expects numbers, got {lt} and {rt}")
        return replace(out, ty=BoolT())
    if op == "++":
        t = unify(lt, rt)
        _need(isinstance(t, AnyListT), e, f"type mismatch: '++' expects lists, got {lt} and {rt}")
        return replace(out, ty=t)
    if op == "::":
        _need(isinstance(rt, (ListT, AnyListT)), e, f"type mismatch: '::' expects a list, got {rt}")
        el = unify(lt, rt.elem)
        _need(el is not None, e, f"type mismatch: {lt} :: {rt}")
        return replace(out, ty=AnyListT(el))
    raise _Fail(f"{_where(e)}unknown operator {op}")


def _has_bound(e: A.Expr) -> bool:
    if isinstance(e, A.Bound):
        return True
    return any(_has_bound(c) for c in A.children(e))


def _check_call(e: A.Call, args, scope: Scope):
    out = replace(e, args=args)
    name, ts = e.func, [a.ty for a in args]

    def arity(n):
        _need(len(args) == n, e, f"{name} expects {n} arguments, got {len(args)}")

    if name == "len":
        arity(1)
        _need(isinstance(ts[0], (ListT, AnyListT, TupleT)), e, f"len expects a list, got {ts[0]}")
        return replace(out, ty=AnyIntT())
    if name == "pow":
        arity(2)
        _need(is_intlike(ts[1]), e, "pow exponent must be an integer")
        _need(is_intlike(ts[0]) or isinstance(ts[0], ZModT), e, "pow base must be a number")
        return replace(out, ty=ts[0] if isinstance(ts[0], ZModT) else AnyIntT())
    if name == "bit":
        arity(2)
        _need(is_intlike(ts[0]) and is_intlike(ts[1]), e, "bit expects integers")
        return replace(out, ty=BoolT())
    if name == "update":
        arity(3)
        _need(isinstance(ts[0], (TupleT, ListT)), e, f"update expects an array or list, got {ts[0]}")
        _need(is_intlike(ts[1]), e, "index must be an integer")
        el = _elem_type(ts[0])
        _need(el is not None and assignable(el, ts[2]), e,
              f"type mismatch: cannot store {ts[2]} in {ts[0]}")
        return replace(out, ty=ts[0])
    if name == "repeat":
        arity(2)
        count = None
        if not A.free_names(args[1]) and not _has_bound(args[1]):
            try:
                count = compile_expr(args[1], {}, scope.funcs)((), (), {})
            except ExprError:
                count = None
        _need(isinstance(count, int) and not isinstance(count, bool) and count >= 0, e,
              "repeat count must be a constant")
        out = replace(out, args=(args[0], A.Lit(count, ty=AnyIntT())))
        return replace(out, ty=TupleT((ts[0],) * count))
    if name == "toint":
        arity(1)
        _need(is_intlike(ts[0]) or isinstance(ts[0], ZModT), e, "toint expects a number")
        return replace(out, ty=AnyIntT())
    _need(name in scope.funcs, e, f"unknown function {name!r}")
    fn = scope.funcs[name]
    arity(len(fn.arg_types))
    for a, t in zip(ts, fn.arg_types):
        _need(assignable(t, a), e, f"type mismatch: {name} expects {t}, got {a}")
    return replace(out, ty=fn.ret)


# --- programs ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Layout:
    """Slot assignment for states. Slots past ``visible`` are internal counters."""

    names: tuple
    types: tuple
    visible: int

    @property
    def slots(self) -> dict:
        return {n: i for i, n in enumerate(self.names)}

    def type_of(self, name):
        return self.types[self.names.index(name)]

    def public(self, state: tuple) -> tuple:
        return state[: self.visible]

    def as_dict(self, state: tuple) -> dict:
        return dict(zip(self.names[: self.visible], state))


@dataclass
class TypedProgram:
    name: str
    source: A.Program        # parsed (undesugared) program
    params: dict             # name -> value
    consts: dict             # name -> (value, type): params and enum labels
    funcs: dict              # name -> FuncTable
    layout: Layout
    body: A.Stmt             # typed, desugared
    init: tuple              # initial state

    @property
    def var_types(self) -> dict:
        return dict(zip(self.layout.names[: self.layout.visible],
                        self.layout.types[: self.layout.visible]))

    def scope(self) -> Scope:
        return Scope({None: self.var_types}, self.consts, self.funcs)


_UNDEF = object()



def _tabulate(fd: A.FunDecl, scope: Scope) -> FuncTable:
    arg_types = tuple(resolve_type(t, scope) for _, t in fd.args)
    ret = resolve_type(fd.ret, scope)
    for (n, _), t in zip(fd.args, arg_types):
        _need(is_finite(t), fd, f"argument {n} of {fd.name} must have a finite type")
    size = 1
    for t in arg_types:
        size *= t.domain_size()
    _need(size <= MAX_TABLE, fd, f"{fd.name} has {size} argument tuples, more than {MAX_TABLE}")
    names = [n for n, _ in fd.args]
    body = check_expr(fd.body, scope, dict(zip(names, arg_types)))
    _need(assignable(ret, body.ty), fd, f"type mismatch: {fd.name} returns {body.ty}, declared {ret}")
    f = compile_expr(body, {}, scope.funcs)
    table = {}
    for args in itertools.product(*(list(t.values()) for t in arg_types)):
        try:
            table[args] = coerce(f((), (), dict(zip(names, args))), ret)
        except ExprError:
            table[args] = _UNDEF
    return _Table(fd.name, arg_types, ret, table)


class _Table(FuncTable):
    def apply(self, args):
        v = super().apply(args)
        if v is _UNDEF:
            raise ExprError(f"{self.name}{args!r} is undefined")
        return v


def _coerce_param(v, t: TypeExpr, p: A.Param):
    if isinstance(t, RatT):
        if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
            raise _Fail(f"{_where(p)}parameter {p.name} must be rational")
        return Fraction(v)
    try:
        return coerce(v, t)
    except ExprError as exc:
        raise _Fail(f"{_where(p)}parameter {p.name}: {exc}") from None


def parse_binding(text: str, scope: Scope):
    """Evaluate a command-line parameter value such as ``8``, ``1/3`` or ``true``."""
    from .parser import parse_expr
    s = text.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        try:
            return Fraction(int(num), int(den))
        except ValueError:
            pass
    return scope.const_eval(parse_expr(s, relational=False))[0]


def typecheck(program: A.Program, bindings: dict | None = None) -> TypedProgram:
    """Bind parameters, resolve names and types, and desugar ``for`` loops.

    Raises TypeCheckError listing every static error found.
    """
    from .desugar import desugar, loop_groups
    bindings = dict(bindings or {})
    errors: list[str] = []
    labels: dict = {}
    for p in program.params:
        enum_labels(p.type, labels)
    for v in program.vars:
        enum_labels(v.type, labels)
    for fd in program.funcs:
        enum_labels(fd.ret, labels)
        for _, t in fd.args:
            enum_labels(t, labels)
    scope = Scope({None: {}}, dict(labels), {})

    declared = {p.name for p in program.params}
    for k in bindings:
        if k not in declared:
            errors.append(f"unknown parameter {k!r}")
    params = {}
    for p in program.params:
        try:
            t = resolve_type(p.type, scope)
            if p.name in bindings:
                v = bindings[p.name]
                if isinstance(v, str):
                    v = parse_binding(v, scope)
            elif p.default is not None:
                v, _ = scope.const_eval(p.default)
            else:
                raise _Fail(f"{_where(p)}parameter {p.name} has no value")
            v = _coerce_param(v, t, p)
            params[p.name] = v
            scope.consts[p.name] = (v, t)
        except _Fail as exc:
            errors.append(str(exc))
    if errors:
        raise TypeCheckError(errors)

    for fd in program.funcs:
        try:
            scope.funcs[fd.name] = _tabulate(fd, scope)
        except _Fail as exc:
            errors.append(str(exc))

    var_types, init = {}, []
    for vd in program.vars:
        try:
            t = resolve_type(vd.type, scope)
            _need(is_finite(t), vd, f"variable {vd.name} must have a finite type, got {t}")
            v, vt = scope.const_eval(vd.init)
            _need(assignable(t, vt), vd, f"type mismatch: cannot initialise {vd.name}: {t} with {vt}")
            try:
                v = coerce(v, t)
            except ExprError as exc:
                raise _Fail(f"{_where(vd)}initial value of {vd.name}: {exc}") from None
            var_types[vd.name] = t
            init.append(v)
        except _Fail as exc:
            errors.append(str(exc))

    body = desugar(program.body)
    groups = sorted(loop_groups(body))
    scope.sides[None] = var_types
    typed_body = _check_stmt(body, scope, errors)
    if errors:
        raise TypeCheckError(errors)
    names = tuple(var_types) + tuple(f"#{g}" for g in groups)
    types = tuple(var_types.values()) + tuple(AnyIntT() for _ in groups)
    layout = Layout(names, types, len(var_types))
    return TypedProgram(program.name, program, params, scope.consts, scope.funcs, layout,
                        typed_body, tuple(init) + (0,) * len(groups))


def check_assertion(e: A.Expr, left: TypedProgram, right: TypedProgram, metas: dict | None = None,
                    bound: dict | None = None) -> A.Expr:
    """Type a relational assertion against the variables of both programs.

    ``metas`` maps meta-variable names to (value, type).
    """
    consts = {**left.consts, **right.consts, **(metas or {})}
    scope = Scope({1: left.var_types, 2: right.var_types}, consts,
                  {**left.funcs, **right.funcs}, relational=True)
    try:
        te = check_expr(e, scope, dict(bound or {}))
    except _Fail as exc:
        raise TypeCheckError([str(exc)]) from None
    if not isinstance(te.ty, BoolT):
        raise TypeCheckError([f"{_where(e)}assertion must be bool, got {te.ty}"])
    return te


def check_program_expr(e: A.Expr, tp: TypedProgram, bound: dict | None = None,
                       consts: dict | None = None) -> A.Expr:
    scope = tp.scope()
    if consts:
        scope.consts = {**scope.consts, **consts}
    try:
        return check_expr(e, scope, dict(bound or {}))
    except _Fail as exc:
        raise TypeCheckError([str(exc)]) from None


def _check_stmt(s: A.Stmt, scope: Scope, errors: list) -> A.Stmt:
    vars_ = scope.sides[None]

    def expr(e):
        return check_expr(e, scope, {})

    def go(s):
        try:
            return one(s)
        except _Fail as exc:
            errors.append(str(exc))
            return s

    def target(s):
        _need(s.var in vars_, s, f"unbound variable {s.var!r}")
        t = vars_[s.var]
        if s.index is None:
            return t, None
        idx = expr(s.index)
        _need(is_intlike(idx.ty), s, f"index must be an integer, got {idx.ty}")
        _need(isinstance(t, (TupleT, ListT)), s, f"cannot index {s.var}: {t}")
        if isinstance(t, TupleT) and isinstance(idx, A.Lit):
            _need(0 <= idx.value < len(t.elems), s, f"index {idx.value} out of range")
            return t.elems[idx.value], idx
        return _elem_type(t), idx

    def one(s):
        if isinstance(s, (A.Skip, A.Abort)):
            return s
        if isinstance(s, A.Seq):
            return replace(s, first=go(s.first), second=go(s.second))
        if isinstance(s, A.Assign):
            t, idx = target(s)
            e = expr(s.expr)
            _need(assignable(t, e.ty), s, f"type mismatch: cannot assign {e.ty} to {s.var}: {t}")
            return replace(s, expr=e, index=idx)
        if isinstance(s, A.Sample):
            t, idx = target(s)
            return replace(s, dist=_check_dist(s.dist, t, s, scope), index=idx)
        if isinstance(s, A.If):
            c = expr(s.cond)
            _need(isinstance(c.ty, BoolT), s, f"condition must be bool, got {c.ty}")
            return replace(s, cond=c, then=go(s.then), else_=go(s.else_))
        if isinstance(s, A.While):
            c = expr(s.cond)
            _need(isinstance(c.ty, BoolT), s, f"loop guard must be bool, got {c.ty}")
            return A.While(c, go(s.body), group=s.group, loc=s.loc)
        raise _Fail(f"{_where(s)}unexpected statement {s!r}")

    return go(s)


def _check_dist(d: A.Dist, target: TypeExpr, s, scope: Scope) -> A.Dist:
    if isinstance(d, A.Bernoulli):
        p = check_expr(d.p, scope, {})
        _need(isinstance(p, A.Lit), d, "coin bias must be a constant")
        v = p.value
        _need(isinstance(v, (int, Fraction)) and not isinstance(v, bool), d, "coin bias must be rational")
        _need(0 < v < 1, d, f"Bernoulli parameter {v} outside (0, 1)")
        _need(isinstance(target, BoolT), s, f"type mismatch: flip samples bool, {s.var} is {target}")
        return replace(d, p=A.Lit(Fraction(v), ty=RatT()))
    if isinstance(d, A.UniformType):
        t = resolve_type(d.type, scope)
        _need(is_finite(t), d, f"cannot sample uniformly from {t}")
        _need(assignable(target, t), s, f"type mismatch: cannot sample {t} into {s.var}: {target}")
        return replace(d, type=t)
    if isinstance(d, A.UniformSet):
        _need(len(d.elems) > 0, d, "uniform set is empty")
        elems = []
        for x in d.elems:
            v, vt = scope.const_eval(x)
            _need(assignable(target, vt), s, f"type mismatch: {vt} element in sample for {s.var}: {target}")
            try:
                v = coerce(v, target)
            except ExprError as exc:
                raise _Fail(f"{_where(x)}{exc}") from None
            elems.append(A.Lit(v, ty=target))
        seen = set()
        for x in elems:
            _need(x.value not in seen, d, f"duplicate element {x.value!r} in uniform set")
            seen.add(x.value)
        return replace(d, elems=tuple(elems))
    raise _Fail(f"{_where(d)}unknown distribution")


def check_stmts(code, tp: TypedProgram) -> A.Stmt:
    """Type statements (text or AST) against the variables of ``tp``; desugared."""
    from .desugar import desugar
    from .parser import parse_stmts
    s = parse_stmts(code) if isinstance(code, str) else code
    scope = Scope({None: tp.var_types}, tp.consts, tp.funcs)
    errors: list = []
    out = _check_stmt(desugar(s), scope, errors)
    if errors:
        raise TypeCheckError(errors)
    return out
