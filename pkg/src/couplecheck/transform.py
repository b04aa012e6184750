"""Program transformations: self-composition, loop splitting, swapping, and
semantic equivalence of statements by exhaustive execution."""
from __future__ import annotations

import zlib
from dataclasses import replace
from fractions import Fraction

from .lang import ast as A
from .lang.printer import format_stmt
from .lang.typecheck import TypedProgram


class SwapError(Exception):
    def __init__(self, shared):
        self.shared = sorted(shared)
        super().__init__(f"statements share variable(s): {', '.join(self.shared)}")


def tag_name(x: str, i: int) -> str:
    return f"{x}@{i}"


def rename_expr(e: A.Expr, mapping: dict, bound=frozenset()) -> A.Expr:
    """Rename free program-variable occurrences (Name or Var) by ``mapping``."""
    if isinstance(e, A.Name):
        return replace(e, id=mapping[e.id]) if e.id in mapping and e.id not in bound else e
    if isinstance(e, A.Var):
        return replace(e, name=mapping[e.name]) if e.name in mapping else e
    if isinstance(e, A.Quant):
        dom = e.domain
        if isinstance(dom, tuple):
            dom = tuple(rename_expr(d, mapping, bound) for d in dom)
        return replace(e, domain=dom, body=rename_expr(e.body, mapping, bound | {e.var}))
    from .assertions import map_children
    return map_children(e, lambda c: rename_expr(c, mapping, bound))


def _rename_dist(d: A.Dist, mapping):
    if isinstance(d, A.UniformSet):
        return replace(d, elems=tuple(rename_expr(x, mapping) for x in d.elems))
    if isinstance(d, A.Bernoulli):
        return replace(d, p=rename_expr(d.p, mapping))
    return d


def rename_stmt(s: A.Stmt, mapping: dict, group_suffix: str = "") -> A.Stmt:
    r = lambda e: rename_expr(e, mapping) if e is not None else None
    if isinstance(s, A.Assign):
        return replace(s, var=mapping.get(s.var, s.var), expr=r(s.expr), index=r(s.index))
    if isinstance(s, A.Sample):
        return replace(s, var=mapping.get(s.var, s.var), dist=_rename_dist(s.dist, mapping), index=r(s.index))
    if isinstance(s, A.Seq):
        return replace(s, first=rename_stmt(s.first, mapping, group_suffix),
                       second=rename_stmt(s.second, mapping, group_suffix))
    if isinstance(s, A.If):
        return replace(s, cond=r(s.cond), then=rename_stmt(s.then, mapping, group_suffix),
                       else_=rename_stmt(s.else_, mapping, group_suffix))
    if isinstance(s, A.While):
        g = s.group
        if g is not None and group_suffix:
            g = g.rstrip("+") + group_suffix + ("+" if g.endswith("+") else "")
        return A.While(r(s.cond), rename_stmt(s.body, mapping, group_suffix), group=g, loc=s.loc)
    if isinstance(s, A.For):
        return replace(s, var=mapping.get(s.var, s.var), lo=r(s.lo), hi=r(s.hi),
                       body=rename_stmt(s.body, mapping, group_suffix))
    return s


def self_compose(p: A.Program, n: int) -> A.Program:
    """s@1; ...; s@n where copy i uses variables x@i. Parameters stay shared."""
    if n < 1:
        raise ValueError("self-composition needs n >= 1")
    names = [v.name for v in p.vars]
    copies, decls = [], []
    for i in range(1, n + 1):
        mapping = {x: tag_name(x, i) for x in names}
        copies.append(rename_stmt(p.body, mapping, group_suffix=f"_{i}"))
    for i in range(1, n + 1):
        mapping = {x: tag_name(x, i) for x in names}
        for v in p.vars:
            decls.append(replace(v, name=tag_name(v.name, i)))
    return A.Program(f"{p.name}_x{n}", p.params, p.funcs, tuple(decls), A.seq(copies))


def self_compose_state(m: dict, n: int) -> dict:
    return {tag_name(x, i): v for i in range(1, n + 1) for x, v in m.items()}


def project_state(m: dict, i: int) -> dict:
    suffix = f"@{i}"
    return {k[: -len(suffix)]: v for k, v in m.items() if k.endswith(suffix)}


def _fresh_group(s: A.While) -> str:
    return "w" + format(zlib.crc32(format_stmt(s).encode()), "08x")


def while_split(s: A.While, e_prime: A.Expr, group: str | None = None) -> A.Stmt:
    """while e {c}  ~>  while e && e' {c}; while e {c}, sharing one iteration budget."""
    if not isinstance(s, A.While):
        raise TypeError("while_split expects a while loop")
    if s.group is None:
        g = group or _fresh_group(s)
        first, rest = g, g + "+"
    else:
        first, rest = s.group, s.group.rstrip("+") + "+"
    cond = A.Binary("&&", s.cond, e_prime, ty=s.cond.ty)
    return A.Seq(A.While(cond, s.body, group=first, loc=s.loc),
                 A.While(s.cond, s.body, group=rest, loc=s.loc), loc=s.loc)


def split_program(p: A.Program, position: int, e_prime: A.Expr, consts: dict | None = None) -> A.Program:
    """``p`` with its top-level loop at 1-based ``position`` split by ``e_prime``.

    ``consts`` replaces free names in ``e_prime`` by literals (meta-parameters).
    The two loops form a group, so the typed program gives them one budget.
    """
    stmts = A.flatten(p.body)
    if not 1 <= position <= len(stmts) or not isinstance(stmts[position - 1], A.While):
        raise ValueError(f"statement {position} is not a while loop")
    if consts:
        e_prime = _inline(e_prime, consts)
    k = position - 1
    s = while_split(stmts[k], e_prime, group=f"split{position}")
    return replace(p, body=A.seq(stmts[:k] + [s.first, s.second] + stmts[k + 1:]))


def _inline(e: A.Expr, consts: dict) -> A.Expr:
    if isinstance(e, A.Name) and e.tag is None and e.id in consts:
        return A.Lit(consts[e.id], loc=e.loc)
    from .assertions import map_children
    return map_children(e, lambda c: _inline(c, consts))


def swap(s1: A.Stmt, s2: A.Stmt, variables: set | None = None) -> A.Stmt:
    """s2; s1 when the statements have no variable in common (read or written).

    ``variables`` restricts the check to program variables (parameters and
    labels are shared constants and never block a swap).
    """
    v1, _ = A.var_footprint(s1)
    v2, _ = A.var_footprint(s2)
    shared = v1 & v2
    if variables is not None:
        shared &= set(variables)
    if shared:
        raise SwapError(shared)
    return A.Seq(s2, s1)


def semantic_equiv(tp: TypedProgram, s1: A.Stmt, s2: A.Stmt, seeds=None, phi=None,
                   fuel: int = 64, budget: int = 10 ** 6):
    """Check exec(s1, m) = exec(s2, m) (masses, residual, error) for every seed.

    ``s1``/``s2`` are typed statements of ``tp``. ``phi`` (optional) filters
    seed pairs; seeds are states of ``tp`` (default: the initial state).
    Returns (True, None) or (False, witness_state).
    """
    from .semantics import Executor
    ex = Executor(tp, fuel)
    seeds = [tp.init] if seeds is None else list(seeds)
    if len(seeds) > budget:
        from .assertions import BudgetExceeded
        raise BudgetExceeded(len(seeds), budget)
    for m in seeds:
        if phi is not None and not phi.eval_raw(m, m, {}):
            continue
        d = {m: Fraction(1)}
        vis = tp.layout.visible
        mu1 = ex.run_dist(s1, d).map(lambda st: st[:vis])
        mu2 = ex.run_dist(s2, d).map(lambda st: st[:vis])
        if mu1 != mu2:
            return False, tp.layout.as_dict(m)
    return True, None
