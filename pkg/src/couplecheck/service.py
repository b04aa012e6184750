"""Request handlers shared by the HTTP API and the command line.

Every handler takes a pydantic request holding file contents (not paths) and
returns a ``Response`` with the exit code, the text rendering and the JSON
rendering of its results. Malformed input gives exit code 2 rather than an
exception, so callers never need to know which layer failed.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, Optional

from pydantic import BaseModel, Field

from .assertions import BudgetExceeded, RelContext, parse_assertion
from .coupling import Infeasible, find_coupling
from .corpus import CorpusError, parse_value, run_corpus
from .lang import ExprError, ParseError, TypeCheckError, format_program, format_value, parse_program, typecheck
from .prhl import ScriptError, parse_judgment, prove_family
from .properties import DEFAULT_TOL, KINDS, ROUTES, PropertyError, PropertyQuery, check
from .report import format_report, jsonable, report_dict
from .semantics import DEFAULT_FUEL, SubDist, check_lossless, full_state, run
from .transform import self_compose

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
USAGE_ERRORS = (ParseError, TypeCheckError, ScriptError, PropertyError, CorpusError, BudgetExceeded,
                ValueError, KeyError)


class UsageError(Exception):
    """Input that cannot be checked at all (exit code 2)."""


# --- requests -----------------------------------------------------------------------------------

class Options(BaseModel):
    fuel: int = Field(DEFAULT_FUEL, ge=1)
    tol: str = f"1/{2 ** 30}"
    seed_enum: bool = False
    jobs: int = Field(1, ge=1)


class ProgramRequest(Options):
    program: str
    bindings: dict[str, Any] = {}


class PropertyRequest(ProgramRequest):
    kind: str
    vars: list[str]
    route: str = "oracle"
    event: Optional[str] = None
    where: Optional[str] = None
    proof: Optional[str] = None
    sample: Optional[int] = Field(None, ge=1)


class ProveRequest(ProgramRequest):
    proof: str


class SelfComposeRequest(BaseModel):
    program: str
    n: int = Field(2, ge=1)


class CouplingRequest(BaseModel):
    left: dict
    right: dict
    psi: str
    slack: str = "0"
    program: Optional[str] = None
    bindings: dict[str, Any] = {}


class CorpusRequest(BaseModel):
    filter: Optional[str] = None
    fuel: Optional[int] = Field(None, ge=1)
    tol: str = f"1/{2 ** 30}"
    routes: list[str] = list(ROUTES)
    jobs: int = Field(1, ge=1)


class Response(BaseModel):
    exit_code: int
    text: str
    data: dict


# --- helpers --------------------------------------------------------------------------------------

def _rational(text: str, what: str) -> Fraction:
    try:
        q = Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{what} must be a rational like 1/1024, got {text!r}") from None
    if q < 0:
        raise UsageError(f"{what} must be nonnegative")
    return q


def _source(text: str):
    return parse_program(text)


def split_bindings(source, binds: dict) -> tuple[dict, dict]:
    """(program parameter bindings, meta-parameter pins) from ``k=v`` pairs."""
    params = {p.name for p in source.params}
    bindings, pins = {}, {}
    for k, v in binds.items():
        (bindings if k in params else pins)[k] = parse_value(v)
    return bindings, pins


def _respond(results: list, extra: dict | None = None) -> Response:
    code = EXIT_OK if all(r.ok for r in results) else EXIT_FAIL
    data = report_dict(results)
    if extra:
        data.update(jsonable(extra))
    return Response(exit_code=code, text=format_report(results, "text"), data=data)


def _usage(msg: str) -> Response:
    return Response(exit_code=EXIT_USAGE, text=f"error: {msg}\n", data={"error": msg})


def guarded(handler: Callable) -> Callable:
    """Turn input errors into exit-code-2 responses."""
    def wrapped(req):
        try:
            return handler(req)
        except UsageError as exc:
            return _usage(str(exc))
        except USAGE_ERRORS as exc:
            return _usage(f"{type(exc).__name__}: {exc}")
    wrapped.__name__ = handler.__name__
    wrapped.__doc__ = handler.__doc__
    return wrapped


# --- run / lossless --------------------------------------------------------------------------------

def _state_text(state: dict) -> str:
    return ", ".join(f"{k}={format_value(v)}" for k, v in state.items())


def dist_json(tp, mu: SubDist) -> dict:
    """The run command's JSON: outcomes by state, residual, weight and variable types."""
    rows = sorted(((tp.layout.as_dict(s), p) for s, p in mu.mass.items()), key=lambda r: _state_text(r[0]))
    out = {"outcomes": [{"state": jsonable(s), "prob": p} for s, p in rows],
           "residual": mu.residual, "weight": mu.weight,
           "types": {n: str(t) for n, t in tp.var_types.items()}}
    if mu.error:
        out["error"] = mu.error
    return jsonable(out)


@guarded
def handle_run(req: ProgramRequest) -> Response:
    """Exact output distribution of a program from its initial state."""
    source = _source(req.program)
    bindings, _ = split_bindings(source, req.bindings)
    tp = typecheck(source, bindings)
    mu = run(tp, req.fuel)
    data = dist_json(tp, mu)
    lines = [f"{_state_text(tp.layout.as_dict(s))}\t{p}"
             for s, p in mu.mass.items()]
    lines.sort()
    lines.append(f"residual {mu.residual}")
    if mu.error:
        lines.append(f"error {mu.error}")
    return Response(exit_code=EXIT_OK, text="\n".join(lines) + "\n", data=data)


@guarded
def handle_lossless(req: ProgramRequest) -> Response:
    """Losslessness within the tolerance at the given fuel."""
    source = _source(req.program)
    bindings, _ = split_bindings(source, req.bindings)
    tp = typecheck(source, bindings)
    tol = _rational(req.tol, "tolerance")
    res = check_lossless(tp, req.fuel, tol)
    verdict = {"exact": "LOSSLESS", "within": "LOSSLESS-WITHIN", "not": "NOT-LOSSLESS"}[res.kind]
    data = jsonable({"verdict": verdict, "residual": res.residual, "deficit": res.deficit,
                     "error": res.error, "fuel": req.fuel, "tol": tol})
    text = f"{tp.name}: {verdict} ({res})\nresidual {res.residual}\n"
    return Response(exit_code=EXIT_OK if res.ok else EXIT_FAIL, text=text, data=data)


# --- properties and proofs ----------------------------------------------------------------------------

@guarded
def handle_property(req: PropertyRequest) -> Response:
    """Uniformity, independence or conditional independence by one route."""
    if req.kind not in KINDS:
        raise UsageError(f"unknown property {req.kind!r} (one of {', '.join(KINDS)})")
    if req.route not in ROUTES:
        raise UsageError(f"unknown route {req.route!r} (one of {', '.join(ROUTES)})")
    if req.route == "proof" and not req.proof:
        raise UsageError("the proof route needs a proof file")
    if req.kind == "cond-indep" and not req.event:
        raise UsageError("cond-indep needs an event")
    source = _source(req.program)
    bindings, pins = split_bindings(source, req.bindings)
    q = PropertyQuery(source, tuple(req.vars), kind=req.kind, route=req.route, event=req.event,
                      where=req.where, proof=parse_judgment(req.proof) if req.proof else None,
                      bindings=bindings, fuel=req.fuel, tol=_rational(req.tol, "tolerance"),
                      seed_enum=req.seed_enum, sample=req.sample, pins=pins)
    return _respond([check(q)])


@guarded
def handle_prove(req: ProveRequest) -> Response:
    """Check a proof script on every instance of its judgment family."""
    source = _source(req.program)
    bindings, pins = split_bindings(source, req.bindings)
    fam = prove_family(source, parse_judgment(req.proof), bindings, req.fuel,
                       _rational(req.tol, "tolerance"), req.seed_enum, pins)
    return _respond([fam])


@guarded
def handle_selfcompose(req: SelfComposeRequest) -> Response:
    """Source text of the n-fold self-composition."""
    text = format_program(self_compose(_source(req.program), req.n))
    parse_program(text)     # the output must read back
    return Response(exit_code=EXIT_OK, text=text, data={"program": text})


# --- couplings ---------------------------------------------------------------------------------------

def _infer_type(values: list) -> str:
    if all(isinstance(v, bool) for v in values):
        return "bool"
    if all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        return f"int({min(values)}, {max(values)})"
    if all(isinstance(v, str) for v in values):
        return "enum{" + ", ".join(dict.fromkeys(values)) + "}"
    if all(isinstance(v, list) for v in values):
        elems = [x for v in values for x in v]
        lens = {len(v) for v in values}
        et = _infer_type(elems) if elems else "bool"
        if len(lens) == 1:
            return f"array({lens.pop()}, {et})"
        return f"list({max(lens)}, {et})"
    raise UsageError(f"cannot infer a type for values {values[:3]!r}")


def _literal(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_literal(x) for x in v) + "]"
    return format_value(v)


def _dist_program(dists: list, declared: dict):
    """A program whose variables are those of the given run outputs."""
    names: dict = {}
    for d in dists:
        for o in d.get("outcomes", []):
            for k, v in o["state"].items():
                names.setdefault(k, []).append(v)
    if not names:
        raise UsageError("the distributions have no outcomes")
    decls = []
    for k, vals in names.items():
        t = declared.get(k) or _infer_type(vals)
        decls.append(f"var {k}: {t} = {_init_for(t, vals[0])}")
    return typecheck(parse_program("program dists\n" + "\n".join(decls) + "\nbegin\n  skip;\nend\n"), {})


def _init_for(t: str, v) -> str:
    if t.startswith("array(") and isinstance(v, list):
        return "(" + ", ".join(_literal(x) for x in v) + ("," if len(v) == 1 else "") + ")"
    return _literal(v)


def _to_value(v):
    return tuple(_to_value(x) for x in v) if isinstance(v, list) else v


def load_dist(tp, d: dict) -> SubDist:
    mass = {}
    for o in d.get("outcomes", []):
        st = full_state(tp, {k: _to_value(v) for k, v in o["state"].items()})
        mass[st] = mass.get(st, Fraction(0)) + Fraction(str(o["prob"]))
    return SubDist(mass, Fraction(str(d.get("residual", "0"))), Fraction(str(d.get("error", "0"))))


class CouplingResult:
    def __init__(self, psi: str, slack: Fraction, res, tp):
        self.psi, self.slack, self.res, self.tp = psi, slack, res, tp

    @property
    def ok(self) -> bool:
        return not isinstance(self.res, Infeasible)

    def _st(self, s):
        return self.tp.layout.as_dict(s) if isinstance(s, tuple) else s

    def to_dict(self) -> dict:
        out = {"type": "coupling", "psi": self.psi, "slack": self.slack, "feasible": self.ok}
        if self.ok:
            out["witness"] = [{"left": self._st(a), "right": self._st(b), "prob": p}
                              for (a, b), p in self.res.joint.items()]
        else:
            r = self.res
            out["cut"] = {"left_set": [self._st(s) for s in r.left_set], "left_mass": r.left_mass,
                          "neighbour_mass": r.neighbour_mass, "overflow": r.overflow, "hall": r.hall}
        return out

    def lines(self) -> list:
        if self.ok:
            out = [f"COUPLING {self.psi}: FOUND (slack {self.slack})"]
            for (a, b), p in self.res.joint.items():
                out.append(f"  {_state_text(self._st(a))} ~ {_state_text(self._st(b))}\t{p}")
            return out
        r = self.res
        left = "; ".join(_state_text(self._st(s)) for s in r.left_set[:8])
        return [f"COUPLING {self.psi}: INFEASIBLE (slack {self.slack})",
                f"  cut: S = {{{left}}} has mass {r.left_mass}, its neighbours {r.neighbour_mass}"
                f" (+ overflow {r.overflow})"]


@guarded
def handle_coupling(req: CouplingRequest) -> Response:
    """Search for a coupling of two run outputs inside the relation psi."""
    if req.program:
        source = _source(req.program)
        bindings, _ = split_bindings(source, req.bindings)
        tp = typecheck(source, bindings)
    else:
        declared = {**req.left.get("types", {}), **req.right.get("types", {})}
        tp = _dist_program([req.left, req.right], declared)
    mu1, mu2 = load_dist(tp, req.left), load_dist(tp, req.right)
    phi = parse_assertion(req.psi, RelContext(tp, tp, {}))

    def psi(a, b):
        try:
            return bool(phi.eval_raw(a, b, {}))
        except ExprError:
            return False
    slack = _rational(req.slack, "slack")
    res = find_coupling(mu1, mu2, psi, slack)
    r = CouplingResult(req.psi, slack, res, tp)
    if r.ok:
        r.res.joint = {(tp.layout.public(a), tp.layout.public(b)): p for (a, b), p in res.joint.items()}
    else:
        r.res.left_set = [s if isinstance(s, dict) else tp.layout.public(s) for s in res.left_set]
    return _respond([r])


# --- corpus ---------------------------------------------------------------------------------------------

@guarded
def handle_corpus(req: CorpusRequest) -> Response:
    """Run the example corpus and compare against its expected values."""
    results = run_corpus(req.filter, req.fuel, req.routes, _rational(req.tol, "tolerance"), req.jobs)
    return _respond(results)


HANDLERS = {
    "run": (ProgramRequest, handle_run),
    "lossless": (ProgramRequest, handle_lossless),
    "property": (PropertyRequest, handle_property),
    "prove": (ProveRequest, handle_prove),
    "selfcompose": (SelfComposeRequest, handle_selfcompose),
    "coupling": (CouplingRequest, handle_coupling),
    "corpus": (CorpusRequest, handle_corpus),
}


def dispatch(name: str, payload: dict) -> Response:
    model, handler = HANDLERS[name]
    return handler(model(**payload))
