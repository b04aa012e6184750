"""The example corpus and its runner.

``manifest.json`` lists each example program with its parameter instances
and the checks to run on every instance. Expected values are written as small
arithmetic formulas over the program parameters and the fuel, each with a note
on where the number comes from.
"""
from __future__ import annotations

import ast
import fnmatch
import itertools
import json
import operator
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..lang import parse_expr, parse_program, parse_type, typecheck
from ..lang.printer import format_value
from ..lang.typecheck import resolve_type
from ..prhl import instantiate_family, parse_judgment, prove_family
from ..properties import ROUTES, PropertyError, PropertyQuery, check, conclude_probability, _event
from ..report import CheckResult, fmt_q
from ..semantics import run
from ..transform import split_program

HERE = Path(__file__).parent
MANIFEST = HERE / "manifest.json"
OP_ROUTE = {"prove": "proof", "conclude": "proof", "probability": "oracle", "residual": "oracle",
            "split": "oracle"}


class CorpusError(ValueError):
    """Bad filter or malformed manifest."""


# --- formulas ---------------------------------------------------------------------------------

_BIN = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: lambda a, b: Fraction(a) / Fraction(b), ast.Pow: operator.pow, ast.Mod: operator.mod}
_CMP = {ast.Eq: operator.eq, ast.NotEq: operator.ne, ast.Lt: operator.lt, ast.LtE: operator.le,
        ast.Gt: operator.gt, ast.GtE: operator.ge}


def formula(text: str, env: dict):
    """Evaluate arithmetic with exact rationals; names come from ``env``."""
    def go(n):
        if isinstance(n, ast.Expression):
            return go(n.body)
        if isinstance(n, ast.Constant) and isinstance(n.value, (int, bool)):
            return n.value
        if isinstance(n, ast.Name):
            if n.id not in env:
                raise CorpusError(f"unknown name {n.id!r} in formula {text!r}")
            return env[n.id]
        if isinstance(n, ast.BinOp) and type(n.op) in _BIN:
            return _BIN[type(n.op)](go(n.left), go(n.right))
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, ast.USub):
            return -go(n.operand)
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, ast.Not):
            return not go(n.operand)
        if isinstance(n, ast.BoolOp):
            vals = [go(v) for v in n.values]
            return all(vals) if isinstance(n.op, ast.And) else any(vals)
        if isinstance(n, ast.Compare) and len(n.ops) == 1 and type(n.ops[0]) in _CMP:
            return _CMP[type(n.ops[0])](go(n.left), go(n.comparators[0]))
        raise CorpusError(f"unsupported syntax in formula {text!r}")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise CorpusError(f"bad formula {text!r}: {exc.msg}") from None
    return go(tree)


def parse_value(v):
    """Binding value from JSON or command-line text: int, rational, bool or label."""
    if isinstance(v, (bool, int)):
        return v
    if not isinstance(v, str):
        raise CorpusError(f"unsupported value {v!r}")
    t = v.strip()
    if t in ("true", "false"):
        return t == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return Fraction(t)
    except ValueError:
        return t


# --- manifest ----------------------------------------------------------------------------------

@dataclass
class Instance:
    bindings: dict
    fuel: int
    let: dict = field(default_factory=dict)
    full: bool = False

    @property
    def label(self) -> str:
        items = {**self.bindings, **self.let}
        return ", ".join(f"{k}={format_value(v)}" for k, v in items.items()) or "default"


@dataclass
class CorpusEntry:
    id: str
    title: str
    program: str
    instances: list
    checks: list

    def source(self):
        path = HERE / self.program
        if not path.exists():
            raise CorpusError(f"missing program file {self.program}")
        return parse_program(path.read_text())


def load_manifest(path: Path = MANIFEST) -> list:
    data = json.loads(Path(path).read_text())
    out = []
    for e in data["entries"]:
        insts = [Instance({k: parse_value(v) for k, v in i.get("bindings", {}).items()},
                          int(i.get("fuel", 64)),
                          {k: parse_value(v) for k, v in i.get("let", {}).items()},
                          bool(i.get("full", False)))
                 for i in e["instances"]]
        out.append(CorpusEntry(e["id"], e.get("title", ""), e["program"], insts, e["checks"]))
    return out


def select(entries: list, pattern: str | None) -> list:
    if not pattern:
        return entries
    chosen = [e for e in entries if fnmatch.fnmatchcase(e.id, pattern)]
    if not chosen:
        known = ", ".join(e.id for e in entries)
        raise CorpusError(f"no corpus entry matches {pattern!r} (known: {known})")
    return chosen


# --- running ------------------------------------------------------------------------------------

def _route(c: dict) -> str:
    return c.get("route") or OP_ROUTE[c["op"]]


def _subst(x, env: dict):
    if isinstance(x, str):
        return string.Template(x).safe_substitute({k: format_value(v) for k, v in env.items()})
    if isinstance(x, list):
        return [_subst(v, env) for v in x]
    if isinstance(x, dict):
        return {k: _subst(v, env) for k, v in x.items()}
    return x


def _judgment(name: str):
    path = HERE / name
    if not path.exists():
        raise CorpusError(f"missing proof file {name}")
    return parse_judgment(path.read_text())


def _query(source, inst: Instance, c: dict, exprs, tol) -> PropertyQuery:
    return PropertyQuery(
        source, tuple(exprs), kind=c["kind"], route=c["route"], event=c.get("event"),
        where=c.get("where"), proof=_judgment(c["proof"]) if c.get("proof") else None,
        bindings=dict(inst.bindings), fuel=inst.fuel, tol=tol,
        pins={k: parse_value(v) for k, v in c.get("pins", {}).items()})


def _run_property(source, inst, c, tol):
    rep = check(_query(source, inst, c, c["exprs"], tol))
    want = c.get("expect", "CERTIFIED")
    lines = rep.lines()
    return rep.verdict == want, lines[0], want, lines[1:]


def _run_subsets(source, inst, c, tol, env):
    lo, hi, size = (int(formula(c[k], env)) for k in ("low", "high", "size"))
    want = c.get("expect", "CERTIFIED")
    total, bad, detail = 0, 0, []
    for combo in itertools.combinations(range(lo, hi + 1), size):
        exprs = [c["template"].replace("#", str(v)) for v in combo]
        rep = check(_query(source, inst, c, exprs, tol))
        total += 1
        if rep.verdict != want:
            bad += 1
            detail.extend(rep.lines())
    return bad == 0, f"{total - bad}/{total} subsets {want}", f"all {want}", detail


def _run_prove(source, inst, c, tol):
    fam = prove_family(source, _judgment(c["proof"]), inst.bindings, inst.fuel, tol,
                       pins={k: parse_value(v) for k, v in c.get("pins", {}).items()})
    want = c.get("expect", "accepted") == "accepted"
    lines = fam.lines()
    return fam.ok == want, lines[0], "ACCEPTED" if want else "REJECTED", lines[1:]


def _run_conclude(source, inst, c, tol):
    spec = _judgment(c["proof"])
    fam = prove_family(source, spec, inst.bindings, inst.fuel, tol)
    if not fam.ok:
        return False, "proof rejected, nothing to conclude", "certified conclusion", fam.lines()[1:]
    ok, detail, head = True, [], ""
    for j in instantiate_family(spec, source, inst.bindings):
        concl = conclude_probability(j, inst.fuel)
        lines = concl.lines()
        head = head or lines[0]
        ok = ok and concl.certified
        detail.extend(([f"[{j.instance}]"] if j.metas else []) + lines[1:])
    return ok, head, "certified conclusion", detail


def _run_probability(tp, inst, c, env):
    mu = run(tp, inst.fuel)
    ev = _event(tp, c["event"])
    if c.get("given"):
        given = _event(tp, c["given"])
        den = mu.pr(given)
        if den == 0:
            raise PropertyError(f"Pr[{c['given']}] = 0")
        val = mu.pr(lambda s: ev(s) and given(s)) / den
        text = f"Pr[{c['event']} | {c['given']}] = {fmt_q(val)}"
    else:
        val = mu.pr(ev)
        text = f"Pr[{c['event']}] = {fmt_q(val)}"
    want = Fraction(formula(c["expect"], env))
    detail = [f"residual {fmt_q(mu.residual, True)}"] if mu.residual else []
    return val == want, text, fmt_q(want), detail


def _run_residual(tp, inst, c, env):
    mu = run(tp, inst.fuel)
    r = mu.residual
    if "expect" in c:
        want = Fraction(formula(c["expect"], env))
        shown = fmt_q(want, True)
        if c["expect"] != str(want):
            shown = f"{c['expect']} = {shown}"
        return r == want, f"residual {fmt_q(r, True)}", shown, []
    bound = Fraction(formula(c["at_most"], env))
    return r <= bound, f"residual {fmt_q(r, True)}", f"at most {c['at_most']}", []


def _run_split(source, tp, inst, c):
    scope = tp.scope()
    metas = [(name, list(resolve_type(parse_type(t), scope).values())) for name, t in c["metas"].items()]
    base = run(tp, inst.fuel)
    combos = list(itertools.product(*(vals for _, vals in metas)))
    for combo in combos:
        consts = {name: v for (name, _), v in zip(metas, combo)}
        p = source
        for pos, cond in c["steps"]:
            p = split_program(p, pos, parse_expr(cond), consts)
        if run(typecheck(p, inst.bindings), inst.fuel) != base:
            where = ", ".join(f"{k}={format_value(v)}" for k, v in consts.items())
            return False, f"split program differs at {where}", "equal distributions", []
    return True, f"equal output distributions for {len(combos)} meta value(s)", "equal distributions", []


def run_check(entry: CorpusEntry, inst: Instance, c: dict, source, tp, tol) -> CheckResult:
    env = {**tp.params, **inst.let, "fuel": inst.fuel}
    c = _subst(c, {**tp.params, **inst.let})
    name = f"{entry.id} [{inst.label}] {c.get('name') or _default_name(c)}"
    res = CheckResult(name, False, route=_route(c), provenance=c.get("provenance", ""))
    op = c["op"]
    try:
        if op == "property":
            out = _run_property(source, inst, c, tol)
        elif op == "subsets":
            out = _run_subsets(source, inst, c, tol, env)
        elif op == "prove":
            out = _run_prove(source, inst, c, tol)
        elif op == "conclude":
            out = _run_conclude(source, inst, c, tol)
        elif op == "probability":
            out = _run_probability(tp, inst, c, env)
        elif op == "residual":
            out = _run_residual(tp, inst, c, env)
        elif op == "split":
            out = _run_split(source, tp, inst, c)
        else:
            raise CorpusError(f"unknown check op {op!r}")
    except CorpusError:
        raise
    except Exception as exc:     # reported per check, the rest of the corpus still runs
        res.observed = f"error: {type(exc).__name__}: {exc}"
        return res
    res.ok, res.observed, res.expected, res.detail = out
    return res


def _default_name(c: dict) -> str:
    op = c["op"]
    if op in ("property", "subsets"):
        what = ", ".join(c.get("exprs", [])) or c.get("template", "")
        given = f" | {c['event']}" if c.get("event") else ""
        return f"{c['kind']} {what}{given}"
    if op in ("prove", "conclude"):
        return f"{op} {c['proof']}"
    return op


def _applies(c: dict, inst: Instance, env: dict, routes) -> bool:
    if c.get("only_full") and not inst.full:
        return False
    if _route(c) not in routes:
        return False
    return not c.get("when") or bool(formula(c["when"], env))


def run_instance(entry: CorpusEntry, k: int, routes, tol, fuel=None) -> list:
    inst = entry.instances[k]
    if fuel is not None:
        inst = Instance(inst.bindings, fuel, inst.let, inst.full)
    source = entry.source()
    tp = typecheck(source, inst.bindings)
    env = {**tp.params, **inst.let, "fuel": inst.fuel}
    return [run_check(entry, inst, c, source, tp, tol) for c in entry.checks
            if _applies(c, inst, env, routes)]


def _task(args):
    entry, k, routes, tol, fuel = args
    return run_instance(entry, k, routes, tol, fuel)


def run_corpus(pattern: str | None = None, fuel: int | None = None, routes=ROUTES,
               tol: Fraction = Fraction(1, 2 ** 30), jobs: int = 1, manifest: Path = MANIFEST) -> list:
    """Run every selected entry on every instance; results come in manifest order.

    ``fuel`` overrides the per-instance fuel of the manifest.
    """
    routes = tuple(routes)
    bad = set(routes) - set(ROUTES)
    if bad:
        raise CorpusError(f"unknown route(s): {', '.join(sorted(bad))}")
    entries = select(load_manifest(manifest), pattern)
    tasks = [(e, k, routes, tol, fuel) for e in entries for k in range(len(e.instances))]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    return [r for chunk in chunks for r in chunk]
