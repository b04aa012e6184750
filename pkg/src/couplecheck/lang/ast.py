"""Abstract syntax of programs, distributions, and (relational) expressions.

One expression syntax serves both program expressions and relational
assertions: assertions additionally use tagged variables, quantifiers and
the logical connectives ``==>``/``<==>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .types import TypeExpr

Loc = Optional[tuple]


def _meta():
    return field(default=None, compare=False, kw_only=True, repr=False)


# --- type syntax (unresolved; sizes may mention params) ----------------------

@dataclass(frozen=True)
class TypeSyntax:
    loc: Loc = _meta()


@dataclass(frozen=True)
class TBool(TypeSyntax):
    pass


@dataclass(frozen=True)
class TRange(TypeSyntax):
    size: Expr


@dataclass(frozen=True)
class TZMod(TypeSyntax):
    modulus: Expr


@dataclass(frozen=True)
class TInt(TypeSyntax):
    lo: Expr
    hi: Expr


@dataclass(frozen=True)
class TEnum(TypeSyntax):
    labels: tuple[str, ...]


@dataclass(frozen=True)
class TTuple(TypeSyntax):
    elems: tuple[TypeSyntax, ...]


@dataclass(frozen=True)
class TArray(TypeSyntax):
    length: Expr
    elem: TypeSyntax


@dataclass(frozen=True)
class TList(TypeSyntax):
    max_len: Expr
    elem: TypeSyntax


@dataclass(frozen=True)
class TRat(TypeSyntax):
    pass


# --- expressions ---------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    ty: Optional[TypeExpr] = _meta()
    loc: Loc = _meta()


@dataclass(frozen=True)
class Lit(Expr):
    value: object


@dataclass(frozen=True)
class Name(Expr):
    """Unresolved identifier; ``tag`` is 1/2 for relational references."""

    id: str
    tag: Optional[int] = None


@dataclass(frozen=True)
class Var(Expr):
    """Resolved program variable, optionally tagged with a side."""

    name: str
    tag: Optional[int] = None


@dataclass(frozen=True)
class Bound(Expr):
    """Variable bound by a quantifier, a bijection or a function table."""

    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    arg: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Cond(Expr):
    cond: Expr
    then: Expr
    else_: Expr


@dataclass(frozen=True)
class TupleE(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class ListE(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class Index(Expr):
    base: Expr
    index: Expr


@dataclass(frozen=True)
class Proj(Expr):
    base: Expr
    field_no: int


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Tagged(Expr):
    """``(e){i}``: tag every untagged program variable in e with side i."""

    expr: Expr
    side: int


@dataclass(frozen=True)
class Quant(Expr):
    kind: str  # "forall" | "exists"
    var: str
    domain: object  # TypeSyntax, TypeExpr, or tuple of Exprs (explicit set)
    body: Expr


@dataclass(frozen=True)
class FCoupled(Expr):
    """Internal atom: the bijection ``fun var -> f`` couples g1 (side 1) and g2 (side 2)."""

    g1: tuple  # support of side 1 as ((value, mass), ...)
    g2: tuple
    var: str
    f: Expr
    var_ty: Optional[TypeExpr] = None


@dataclass(frozen=True)
class Labeled(Expr):
    """Internal: names a proof obligation for diagnostics; evaluates as ``expr``."""

    label: str
    expr: Expr


# --- distributions ----------------------------------------------------------------

@dataclass(frozen=True)
class Dist:
    loc: Loc = _meta()


@dataclass(frozen=True)
class UniformType(Dist):
    type: object  # TypeSyntax before typing, TypeExpr after


@dataclass(frozen=True)
class UniformSet(Dist):
    elems: tuple[Expr, ...]


@dataclass(frozen=True)
class Bernoulli(Dist):
    p: Expr


# --- statements ------------------------------------------------------------------

@dataclass(frozen=True)
class Stmt:
    loc: Loc = _meta()


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class Abort(Stmt):
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    var: str
    expr: Expr
    index: Optional[Expr] = None


@dataclass(frozen=True)
class Sample(Stmt):
    var: str
    dist: Dist
    index: Optional[Expr] = None


@dataclass(frozen=True)
class Seq(Stmt):
    first: Stmt
    second: Stmt


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    else_: Stmt


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Stmt
    # loops produced by splitting one loop share an iteration budget
    group: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class For(Stmt):
    var: str
    lo: Expr
    hi: Expr
    body: Stmt


# --- programs ------------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    type: TypeSyntax
    default: Optional[Expr] = None
    loc: Loc = _meta()


@dataclass(frozen=True)
class FunDecl:
    name: str
    args: tuple[tuple[str, TypeSyntax], ...]
    ret: TypeSyntax
    body: Expr
    loc: Loc = _meta()


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: TypeSyntax
    init: Expr
    loc: Loc = _meta()


@dataclass(frozen=True)
class Program:
    name: str
    params: tuple[Param, ...]
    funcs: tuple[FunDecl, ...]
    vars: tuple[VarDecl, ...]
    body: Stmt


# --- helpers ------------------------------------------------------------------------

def seq(stmts) -> Stmt:
    """Right-nested sequence of statements; skip when empty."""
    stmts = [s for s in stmts if not isinstance(s, Skip)]
    if not stmts:
        return Skip()
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def flatten(s: Stmt) -> list[Stmt]:
    """Top-level statement list of ``s`` with skips dropped."""
    if isinstance(s, Seq):
        return flatten(s.first) + flatten(s.second)
    if isinstance(s, Skip):
        return []
    return [s]


def conj(items) -> Expr:
    items = list(items)
    if not items:
        return Lit(True)
    out = items[-1]
    for e in reversed(items[:-1]):
        out = Binary("&&", e, out)
    return out


def var_footprint(s: Stmt) -> tuple[set, set]:
    """(all variables occurring in s, variables written by s)."""
    everything: set = set()
    written: set = set()

    def expr_vars(e):
        if e is not None:
            everything.update(free_names(e))

    def go(st):
        if isinstance(st, (Assign, Sample)):
            everything.add(st.var)
            written.add(st.var)
            expr_vars(st.index)
            if isinstance(st, Assign):
                expr_vars(st.expr)
            else:
                everything.update(dist_names(st.dist))
        elif isinstance(st, Seq):
            go(st.first)
            go(st.second)
        elif isinstance(st, If):
            expr_vars(st.cond)
            go(st.then)
            go(st.else_)
        elif isinstance(st, While):
            expr_vars(st.cond)
            go(st.body)
        elif isinstance(st, For):
            everything.add(st.var)
            written.add(st.var)
            expr_vars(st.lo)
            expr_vars(st.hi)
            go(st.body)

    go(s)
    return everything, written


def dist_names(d: Dist) -> set:
    if isinstance(d, UniformSet):
        out = set()
        for e in d.elems:
            out |= free_names(e)
        return out
    if isinstance(d, Bernoulli):
        return free_names(d.p)
    return set()


def free_names(e: Expr, bound=frozenset()) -> set:
    """Names of variables (Name or Var nodes) occurring free in e."""
    if isinstance(e, Name):
        return set() if e.id in bound else {e.id}
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Quant):
        out = free_names(e.body, bound | {e.var})
        if isinstance(e.domain, tuple):
            for d in e.domain:
                out |= free_names(d, bound)
        return out
    if isinstance(e, FCoupled):
        return free_names(e.f, bound | {e.var})
    out = set()
    for child in children(e):
        out |= free_names(child, bound)
    return out


def children(e: Expr) -> tuple:
    if isinstance(e, Unary):
        return (e.arg,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Cond):
        return (e.cond, e.then, e.else_)
    if isinstance(e, (TupleE, ListE)):
        return e.items
    if isinstance(e, Index):
        return (e.base, e.index)
    if isinstance(e, Proj):
        return (e.base,)
    if isinstance(e, Call):
        return e.args
    if isinstance(e, (Tagged, Labeled)):
        return (e.expr,)
    if isinstance(e, Quant):
        return (e.body,)
    return ()
