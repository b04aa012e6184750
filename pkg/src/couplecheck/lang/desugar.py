"""Removal of derived statement forms."""
from __future__ import annotations

from dataclasses import replace

from . import ast as A


def desugar(s: A.Stmt) -> A.Stmt:
    """Rewrite ``for i = lo to hi { c }`` as ``i := lo; while i <= hi { c; i := i + 1 }``.

    The counter ends at ``hi + 1``, so its type must include that value.
    """
    if isinstance(s, A.For):
        i = A.Name(s.var, loc=s.loc)
        step = A.Assign(s.var, A.Binary("+", i, A.Lit(1)), loc=s.loc)
        loop = A.While(A.Binary("<=", i, s.hi), A.seq([desugar(s.body), step]), loc=s.loc)
        return A.Seq(A.Assign(s.var, s.lo, loc=s.loc), loop, loc=s.loc)
    if isinstance(s, A.Seq):
        return replace(s, first=desugar(s.first), second=desugar(s.second))
    if isinstance(s, A.If):
        return replace(s, then=desugar(s.then), else_=desugar(s.else_))
    if isinstance(s, A.While):
        return A.While(s.cond, desugar(s.body), group=s.group, loc=s.loc)
    return s


def loop_groups(s: A.Stmt) -> set:
    if isinstance(s, A.Seq):
        return loop_groups(s.first) | loop_groups(s.second)
    if isinstance(s, A.If):
        return loop_groups(s.then) | loop_groups(s.else_)
    if isinstance(s, A.While):
        return ({group_slot(s.group)} if s.group else set()) | loop_groups(s.body)
    if isinstance(s, A.For):
        return loop_groups(s.body)
    return set()


def group_slot(group: str) -> str:
    """Counter shared by a loop group. ``g`` starts the group, ``g+`` continues it."""
    return group.rstrip("+")
