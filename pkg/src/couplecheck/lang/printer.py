"""Concrete-syntax printing; ``parse_program(format_program(p)) == p``."""
from __future__ import annotations

from fractions import Fraction

from . import ast as A
from .types import TypeExpr


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, tuple):
        return "(" + ", ".join(format_value(x) for x in v) + ("," if len(v) == 1 else "") + ")"
    return str(v)


def format_type(t) -> str:
    if isinstance(t, TypeExpr):
        return str(t)
    if isinstance(t, A.TBool):
        return "bool"
    if isinstance(t, A.TRat):
        return "rat"
    if isinstance(t, A.TRange):
        return f"range({format_expr(t.size)})"
    if isinstance(t, A.TZMod):
        return f"zmod({format_expr(t.modulus)})"
    if isinstance(t, A.TInt):
        return f"int({format_expr(t.lo)}, {format_expr(t.hi)})"
    if isinstance(t, A.TEnum):
        return "enum{" + ", ".join(t.labels) + "}"
    if isinstance(t, A.TTuple):
        return "tuple(" + ", ".join(format_type(e) for e in t.elems) + ")"
    if isinstance(t, A.TArray):
        return f"array({format_expr(t.length)}, {format_type(t.elem)})"
    if isinstance(t, A.TList):
        return f"list({format_expr(t.max_len)}, {format_type(t.elem)})"
    raise TypeError(f"not a type: {t!r}")


def format_expr(e: A.Expr) -> str:
    if isinstance(e, A.Lit):
        return format_value(e.value)
    if isinstance(e, A.Name):
        return e.id if e.tag is None else f"{e.id}{{{e.tag}}}"
    if isinstance(e, A.Var):
        return e.name if e.tag is None else f"{e.name}{{{e.tag}}}"
    if isinstance(e, A.Bound):
        return e.name
    if isinstance(e, A.Unary):
        return f"{e.op}{_atom(e.arg)}"
    if isinstance(e, A.Binary):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    if isinstance(e, A.Cond):
        return f"(if {format_expr(e.cond)} then {format_expr(e.then)} else {format_expr(e.else_)})"
    if isinstance(e, A.TupleE):
        return "(" + ", ".join(format_expr(x) for x in e.items) + ")"
    if isinstance(e, A.ListE):
        return "[" + ", ".join(format_expr(x) for x in e.items) + "]"
    if isinstance(e, A.Index):
        return f"{_atom(e.base)}[{format_expr(e.index)}]"
    if isinstance(e, A.Proj):
        return f"{_atom(e.base)}.{e.field_no}"
    if isinstance(e, A.Call):
        return f"{e.func}(" + ", ".join(format_expr(x) for x in e.args) + ")"
    if isinstance(e, A.Tagged):
        return f"({format_expr(e.expr)}){{{e.side}}}"
    if isinstance(e, A.Quant):
        if isinstance(e.domain, tuple):
            dom = "in {" + ", ".join(format_expr(x) for x in e.domain) + "}"
        else:
            dom = ": " + format_type(e.domain)
        return f"({e.kind} {e.var} {dom}, {format_expr(e.body)})"
    if isinstance(e, A.Labeled):
        return format_expr(e.expr)
    if isinstance(e, A.FCoupled):
        return (f"coupled({format_dist(e.g1)}, {format_dist(e.g2)}, "
                f"fun {e.var} -> {format_expr(e.f)})")
    raise TypeError(f"not an expression: {e!r}")


def _atom(e: A.Expr) -> str:
    s = format_expr(e)
    if isinstance(e, (A.Lit, A.Name, A.Var, A.Bound, A.Call, A.Index, A.Proj)) and not s.startswith("-"):
        return s
    if isinstance(e, (A.Binary, A.Cond, A.Quant, A.TupleE)):
        return s
    return f"({s})"


def format_dist(d: A.Dist) -> str:
    if isinstance(d, A.UniformType):
        return f"uniform({format_type(d.type)})"
    if isinstance(d, A.UniformSet):
        return "uniform{" + ", ".join(format_expr(x) for x in d.elems) + "}"
    if isinstance(d, A.Bernoulli):
        return f"flip({format_expr(d.p)})"
    raise TypeError(f"not a distribution: {d!r}")


def _lhs(var, index):
    return var if index is None else f"{var}[{format_expr(index)}]"


def format_stmt(s: A.Stmt, indent: int = 0) -> str:
    return "\n".join(_stmt_lines(s, indent))


def _stmt_lines(s: A.Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(s, A.Seq):
        return [line for st in A.flatten(s) for line in _stmt_lines(st, indent)]
    if isinstance(s, A.Skip):
        return [pad + "skip;"]
    if isinstance(s, A.Abort):
        return [pad + "abort;"]
    if isinstance(s, A.Assign):
        return [f"{pad}{_lhs(s.var, s.index)} := {format_expr(s.expr)};"]
    if isinstance(s, A.Sample):
        return [f"{pad}{_lhs(s.var, s.index)} <$ {format_dist(s.dist)};"]
    if isinstance(s, A.If):
        lines = [f"{pad}if {format_expr(s.cond)} {{"] + _block(s.then, indent + 1)
        if not isinstance(s.else_, A.Skip):
            lines.append(pad + "} else {")
            lines += _block(s.else_, indent + 1)
        return lines + [pad + "}"]
    if isinstance(s, A.While):
        return [f"{pad}while {format_expr(s.cond)} {{"] + _block(s.body, indent + 1) + [pad + "}"]
    if isinstance(s, A.For):
        return ([f"{pad}for {s.var} = {format_expr(s.lo)} to {format_expr(s.hi)} {{"]
                + _block(s.body, indent + 1) + [pad + "}"])
    raise TypeError(f"not a statement: {s!r}")


def _block(s: A.Stmt, indent: int) -> list[str]:
    # an explicit skip inside a block is kept so the block round-trips
    if isinstance(s, A.Skip):
        return []
    return _stmt_lines(s, indent)


def format_program(p: A.Program) -> str:
    lines = [f"program {p.name}"]
    for prm in p.params:
        line = f"param {prm.name} : {format_type(prm.type)}"
        if prm.default is not None:
            line += f" = {format_expr(prm.default)}"
        lines.append(line)
    for f in p.funcs:
        args = ", ".join(f"{n} : {format_type(t)}" for n, t in f.args)
        lines.append(f"fun {f.name}({args}) : {format_type(f.ret)} = {format_expr(f.body)}")
    for v in p.vars:
        lines.append(f"var {v.name} : {format_type(v.type)} = {format_expr(v.init)}")
    lines.append("begin")
    if not isinstance(p.body, A.Skip):
        lines += _stmt_lines(p.body, 1)
    lines.append("end")
    return "\n".join(lines) + "\n"
