"""Judgments, proof-script trees, and the ``.prf`` file format."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..assertions import Assertion, RelContext, parse_assertion
from ..lang import ast as A
from ..lang.parser import parse_expr, parse_type
from ..lang.typecheck import TypedProgram, resolve_type, typecheck, Scope
from ..lang.types import AnyIntT, BoolT, EnumT, TypeExpr
from ..transform import self_compose
from .sexpr import Str, Sym, read, split_args

RULES = {
    "skip", "assg", "assgl", "assgr", "rand", "randl", "randr", "cond", "condl", "condr",
    "while", "whilel", "whiler", "seq", "case", "conseq", "struct",
}


class ScriptError(Exception):
    """Malformed proof script or judgment file."""


@dataclass
class Node:
    rule: str
    args: dict = field(default_factory=dict)
    children: list = field(default_factory=list)

    def __str__(self):
        return self.rule


def _norm_rule(name: str) -> str:
    r = name.lower().replace("-", "").replace("_", "")
    if r not in RULES:
        raise ScriptError(f"unknown rule {name!r}")
    return r


def _steps(x):
    if not isinstance(x, list):
        raise ScriptError(f"struct steps must be lists, got {x!r}")
    if x and isinstance(x[0], Sym):
        return [x]
    return list(x)


def to_node(sx) -> Node:
    if not isinstance(sx, list) or not sx or not isinstance(sx[0], Sym):
        raise ScriptError(f"expected a rule application, got {sx!r}")
    rule = _norm_rule(sx[0])
    kw, pos = split_args(sx[1:])
    if rule == "struct":
        for side in ("left", "right"):
            if side in kw:
                kw[side] = _steps(kw[side])
    children = [to_node(c) for c in pos]
    arity = {"skip": 0, "assg": 0, "assgl": 0, "assgr": 0, "rand": 0, "randl": 0, "randr": 0,
             "cond": 2, "condl": 2, "condr": 2, "while": 1, "whilel": 1, "whiler": 1,
             "case": 2, "conseq": 1, "struct": 1}
    if rule in arity and len(children) != arity[rule]:
        raise ScriptError(f"rule {rule} expects {arity[rule]} sub-proofs, got {len(children)}")
    if rule == "seq" and len(children) < 2:
        raise ScriptError("seq expects at least two sub-proofs")
    if rule in ("while", "whilel", "whiler") and "inv" not in kw:
        raise ScriptError(f"rule {rule} needs :inv")
    if rule == "case" and "xi" not in kw:
        raise ScriptError("rule case needs :xi")
    return Node(rule, kw, children)


def parse_script(text: str) -> Node:
    return to_node(read(text))


# --- judgments -------------------------------------------------------------------------------

@dataclass
class MetaDecl:
    name: str
    type: object          # TypeSyntax, or None for an explicit value list
    values: tuple | None = None


@dataclass
class JudgmentSpec:
    """A judgment family as written in a proof file (before instantiation)."""

    left: object = "self"          # "self" or ("selfcompose", n)
    right: object = "self"
    metas: list = field(default_factory=list)
    pre: str = "true"
    post: str = "true"
    proof: Node | None = None
    name: str = ""


def _side_spec(x):
    if isinstance(x, Sym) and x == "self":
        return "self"
    if isinstance(x, list) and len(x) == 2 and x[0] == "selfcompose" and isinstance(x[1], int):
        return ("selfcompose", x[1])
    raise ScriptError(f"program side must be self or (selfcompose N), got {x!r}")


def parse_judgment(text: str) -> JudgmentSpec:
    sx = read(text)
    if not (isinstance(sx, list) and sx and sx[0] == "judgment"):
        raise ScriptError("a proof file holds one (judgment ...) form")
    kw, pos = split_args(sx[1:])
    unknown = set(kw) - {"left", "right", "meta", "pre", "post", "proof", "name"}
    if unknown:
        raise ScriptError(f"unknown judgment field(s): {', '.join(sorted(unknown))}")
    metas = []
    for m in kw.get("meta", []):
        if not (isinstance(m, list) and len(m) == 2 and isinstance(m[0], Sym)):
            raise ScriptError(f"meta declaration must be (name type), got {m!r}")
        name, t = m
        if isinstance(t, list):
            metas.append(MetaDecl(name, None, tuple(_literal(v) for v in t)))
        else:
            metas.append(MetaDecl(name, parse_type(str(t))))
    proof = to_node(kw["proof"]) if "proof" in kw else None
    return JudgmentSpec(_side_spec(kw.get("left", Sym("self"))), _side_spec(kw.get("right", Sym("self"))),
                        metas, str(kw.get("pre", "true")), str(kw.get("post", "true")), proof,
                        str(kw.get("name", "")))


def _literal(v):
    if isinstance(v, int):
        return v
    if v in ("true", "false"):
        return v == "true"
    return str(v)


@dataclass
class Judgment:
    """A ground judgment  |= left ~ right : pre ==> post."""

    left: TypedProgram
    right: TypedProgram
    pre: Assertion
    post: Assertion
    ctx: RelContext
    metas: dict = field(default_factory=dict)   # name -> value for this instance

    @property
    def instance(self) -> str:
        from ..lang.printer import format_value
        return ", ".join(f"{k}={format_value(v)}" for k, v in self.metas.items())


def build_side(spec, source: A.Program, bindings: dict) -> TypedProgram:
    if spec == "self":
        return typecheck(source, bindings)
    return typecheck(self_compose(source, spec[1]), bindings)


def meta_domains(spec: JudgmentSpec, tp: TypedProgram) -> list:
    """[(name, type, values)] for each declared meta-parameter."""
    scope = tp.scope()
    out = []
    for m in spec.metas:
        if m.values is not None:
            vals = list(m.values)
            t = BoolT() if all(isinstance(v, bool) for v in vals) else (
                AnyIntT() if all(isinstance(v, int) and not isinstance(v, bool) for v in vals) else
                EnumT(tuple(dict.fromkeys(vals))))
        else:
            t = resolve_type(m.type, scope)
            vals = list(t.values())
        out.append((m.name, t, vals))
    return out


def instantiate_family(spec: JudgmentSpec, source: A.Program, bindings: dict | None = None,
                       only: dict | None = None):
    """One ground Judgment per assignment of the meta-parameters, in a fixed order.

    ``only`` pins some metas to a single value.
    """
    left = build_side(spec.left, source, bindings or {})
    right = left if spec.right == spec.left else build_side(spec.right, source, bindings or {})
    doms = meta_domains(spec, left)
    if only:
        doms = [(n, t, [only[n]] if n in only else vals) for n, t, vals in doms]
    for combo in itertools.product(*(vals for _, _, vals in doms)):
        metas = {n: (v, t) for (n, t, _), v in zip(doms, combo)}
        ctx = RelContext(left, right, metas)
        pre = parse_assertion(spec.pre, ctx)
        post = parse_assertion(spec.post, ctx)
        yield Judgment(left, right, pre, post, ctx, {n: v for n, (v, _) in metas.items()})


def ground(left: TypedProgram, right: TypedProgram, pre, post, metas: dict | None = None) -> Judgment:
    """Judgment from assertion texts/ASTs with fixed meta values {name: (value, type)}."""
    ctx = RelContext(left, right, dict(metas or {}))
    return Judgment(left, right, parse_assertion(pre, ctx), parse_assertion(post, ctx), ctx,
                    {n: v for n, (v, _) in (metas or {}).items()})
