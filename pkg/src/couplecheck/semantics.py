"""Exact denotational semantics: programs denote sub-distributions over states.

Masses are Fractions. While loops run for at most ``fuel`` iterations; mass
that still satisfies the guard afterwards is kept as ``residual`` rather than
dropped, and mass lost to a failing partial operator is kept as ``error``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .lang import ast as A
from .lang.desugar import group_slot
from .lang.evaluate import ExprError, coerce, compile_expr, dist_support
from .lang.typecheck import TypedProgram
from .lang.types import ListT, TupleT

ZERO = Fraction(0)
DEFAULT_FUEL = 64


@dataclass(eq=False)
class SubDist:
    """Finite sub-distribution with separate residual (truncation) and error mass."""

    mass: dict = field(default_factory=dict)
    residual: Fraction = ZERO
    error: Fraction = ZERO

    def __post_init__(self):
        self.mass = {k: v for k, v in self.mass.items() if v != 0}

    def __eq__(self, other):
        return (isinstance(other, SubDist) and self.mass == other.mass
                and self.residual == other.residual and self.error == other.error)

    def __repr__(self):
        items = ", ".join(f"{k!r}: {v}" for k, v in self.mass.items())
        extra = ""
        if self.residual:
            extra += f", residual={self.residual}"
        if self.error:
            extra += f", error={self.error}"
        return f"SubDist({{{items}}}{extra})"

    @property
    def weight(self) -> Fraction:
        return sum(self.mass.values(), ZERO)

    @property
    def support(self) -> set:
        return set(self.mass)

    def __getitem__(self, v) -> Fraction:
        return self.mass.get(v, ZERO)

    def pr(self, event: Callable) -> Fraction:
        return pr_event(self, event)

    def map(self, f: Callable) -> "SubDist":
        out: dict = {}
        for v, p in self.mass.items():
            w = f(v)
            out[w] = out.get(w, ZERO) + p
        return SubDist(out, self.residual, self.error)

    def bind(self, k: Callable) -> "SubDist":
        return bind(self, k)

    def is_proper(self) -> bool:
        return self.weight == 1


def dirac(v) -> SubDist:
    return SubDist({v: Fraction(1)})


def uniform(values) -> SubDist:
    vals = list(values)
    q = Fraction(1, len(vals))
    out: dict = {}
    for v in vals:
        out[v] = out.get(v, ZERO) + q
    return SubDist(out)


def bind(mu: SubDist, k: Callable) -> SubDist:
    """Monadic bind; residual and error mass propagate, scaled by mu."""
    out: dict = {}
    residual, error = mu.residual, mu.error
    for a, p in mu.mass.items():
        nu = k(a)
        for b, q in nu.mass.items():
            out[b] = out.get(b, ZERO) + p * q
        residual += p * nu.residual
        error += p * nu.error
    return SubDist(out, residual, error)


def pr_event(mu: SubDist, event: Callable) -> Fraction:
    return sum((p for v, p in mu.mass.items() if event(v)), ZERO)


def marginal(mu: SubDist, i: int) -> SubDist:
    if i not in (1, 2):
        raise ValueError("marginal index must be 1 or 2")
    for v in mu.mass:
        if not (isinstance(v, tuple) and len(v) == 2):
            raise ValueError(f"marginal of a non-pair value {v!r}")
    return mu.map(lambda v: v[i - 1])


def product(mu: SubDist, nu: SubDist) -> SubDist:
    return bind(mu, lambda a: nu.map(lambda b: (a, b)))


def eval_dist(d: A.Dist, m=None, target=None) -> SubDist:
    """Distribution denoted by a typed distribution expression (state-independent)."""
    out: dict = {}
    for v, p in dist_support(d, target):
        out[v] = out.get(v, ZERO) + p
    return SubDist(out)


# --- statements ----------------------------------------------------------------------

class _Acc:
    __slots__ = ("residual", "error")

    def __init__(self):
        self.residual = ZERO
        self.error = ZERO


def _add(d: dict, k, p):
    d[k] = d.get(k, ZERO) + p


class Executor:
    """Compiles statements of one typed program to distribution transformers."""

    def __init__(self, tp: TypedProgram, fuel: int = DEFAULT_FUEL):
        if fuel < 1:
            raise ValueError("fuel must be at least 1")
        self.tp = tp
        self.fuel = fuel
        self.slots = tp.layout.slots
        self.types = tp.layout.types
        self._cache: dict = {}

    def expr(self, e):
        return compile_expr(e, {None: self.slots, 1: self.slots}, self.tp.funcs)

    def compile(self, s: A.Stmt):
        key = id(s)
        hit = self._cache.get(key)
        if hit is not None and hit[0] is s:
            return hit[1]
        f = self._compile(s)
        self._cache[key] = (s, f)
        return f

    def _target(self, s):
        i = self.slots[s.var]
        t = self.types[i]
        if s.index is None:
            return i, t, None
        if isinstance(t, TupleT):
            elem = t.elems[s.index.value] if isinstance(s.index, A.Lit) else t.elems[0]
        elif isinstance(t, ListT):
            elem = t.elem
        else:
            raise TypeError(t)
        return i, elem, self.expr(s.index)

    def _compile(self, s: A.Stmt):
        if isinstance(s, A.Skip):
            return lambda d, acc: d
        if isinstance(s, A.Abort):
            return lambda d, acc: {}
        if isinstance(s, A.Seq):
            f1, f2 = self.compile(s.first), self.compile(s.second)
            return lambda d, acc: f2(f1(d, acc), acc)
        if isinstance(s, A.Assign):
            i, t, idxf = self._target(s)
            ef = self.expr(s.expr)

            def assign(d, acc):
                out: dict = {}
                for m, p in d.items():
                    try:
                        v = coerce(ef(m, m, None), t)
                        if idxf is not None:
                            v = _store(m[i], idxf(m, m, None), v)
                    except ExprError:
                        acc.error += p
                        continue
                    _add(out, m[:i] + (v,) + m[i + 1:], p)
                return out
            return assign
        if isinstance(s, A.Sample):
            i, t, idxf = self._target(s)
            supp = dist_support(s.dist, t)

            def sample(d, acc):
                out: dict = {}
                for m, p in d.items():
                    if idxf is None:
                        for v, q in supp:
                            _add(out, m[:i] + (v,) + m[i + 1:], p * q)
                        continue
                    try:
                        k = idxf(m, m, None)
                        cells = [(_store(m[i], k, v), q) for v, q in supp]
                    except ExprError:
                        acc.error += p
                        continue
                    for v, q in cells:
                        _add(out, m[:i] + (v,) + m[i + 1:], p * q)
                return out
            return sample
        if isinstance(s, A.If):
            cf = self.expr(s.cond)
            f1, f2 = self.compile(s.then), self.compile(s.else_)

            def branch(d, acc):
                dt, df = self._split(cf, d, acc)
                out = f1(dt, acc) if dt else {}
                for m, p in (f2(df, acc) if df else {}).items():
                    _add(out, m, p)
                return out
            return branch
        if isinstance(s, A.While):
            return self._while(s)
        raise TypeError(f"cannot execute {s!r}; desugar first")

    def _split(self, cf, d, acc):
        dt, df = {}, {}
        for m, p in d.items():
            try:
                c = cf(m, m, None)
            except ExprError:
                acc.error += p
                continue
            (dt if c else df)[m] = p
        return dt, df

    def _while(self, s: A.While):
        cf = self.expr(s.cond)
        body = self.compile(s.body)
        fuel = self.fuel
        if s.group is None or "#" + group_slot(s.group) not in self.slots:
            # split loops outside a program with a counter slot run independently
            def loop(d, acc):
                out: dict = {}
                cur = d
                for _ in range(fuel):
                    dt, df = self._split(cf, cur, acc)
                    for m, p in df.items():
                        _add(out, m, p)
                    if not dt:
                        return out
                    cur = body(dt, acc)
                dt, df = self._split(cf, cur, acc)
                for m, p in df.items():
                    _add(out, m, p)
                acc.residual += sum(dt.values(), ZERO)
                return out
            return loop

        c = self.slots["#" + group_slot(s.group)]
        starts = not s.group.endswith("+")

        def grouped(d, acc):
            out: dict = {}
            if starts:
                cur: dict = {}
                for m, p in d.items():
                    _add(cur, m[:c] + (0,) + m[c + 1:], p)
            else:
                cur = d
            while cur:
                dt, df = self._split(cf, cur, acc)
                for m, p in df.items():
                    _add(out, m, p)
                go: dict = {}
                for m, p in dt.items():
                    if m[c] >= fuel:
                        acc.residual += p
                    else:
                        _add(go, m[:c] + (m[c] + 1,) + m[c + 1:], p)
                cur = body(go, acc) if go else {}
            return out
        return grouped

    def run_dist(self, s: A.Stmt, d: dict) -> SubDist:
        """Execute ``s`` on a distribution over full (internal) states."""
        acc = _Acc()
        out = self.compile(s)(d, acc)
        return SubDist(out, acc.residual, acc.error)


def _store(seq, k, v):
    if not 0 <= k < len(seq):
        raise ExprError(f"index {k} out of range for length {len(seq)}")
    return seq[:k] + (v,) + seq[k + 1:]


def full_state(tp: TypedProgram, m=None) -> tuple:
    """Internal state from a visible state (tuple or name->value dict)."""
    lay = tp.layout
    if m is None:
        return tp.init
    if isinstance(m, dict):
        base = list(tp.init)
        for k, v in m.items():
            i = lay.names.index(k)
            if i >= lay.visible:
                raise KeyError(k)
            base[i] = coerce(v, lay.types[i])
        return tuple(base)
    m = tuple(m)
    if len(m) == len(lay.names):
        return m
    if len(m) != lay.visible:
        raise ValueError(f"state has {len(m)} components, expected {lay.visible}")
    return m + tp.init[lay.visible:]


def exec_stmt(tp: TypedProgram, s: A.Stmt | None = None, m=None, fuel: int = DEFAULT_FUEL,
              executor: Executor | None = None) -> SubDist:
    """Run ``s`` (default: the program body) from state ``m`` (default: initial).

    The result is over visible states: internal loop counters are projected out.
    """
    ex = executor or Executor(tp, fuel)
    mu = ex.run_dist(tp.body if s is None else s, {full_state(tp, m): Fraction(1)})
    vis = tp.layout.visible
    if vis == len(tp.layout.names):
        return mu
    return mu.map(lambda st: st[:vis])


def run(tp: TypedProgram, fuel: int = DEFAULT_FUEL) -> SubDist:
    return exec_stmt(tp, None, None, fuel)


# --- losslessness --------------------------------------------------------------------------

@dataclass(frozen=True)
class Lossless:
    """Outcome of a losslessness check.

    ``kind`` is "exact", "within" or "not"; ``residual`` is truncated mass and
    ``deficit`` is mass lost to abort or runtime errors.
    """

    kind: str
    residual: Fraction = ZERO
    deficit: Fraction = ZERO
    error: Fraction = ZERO

    @property
    def ok(self) -> bool:
        return self.kind != "not"

    def __str__(self):
        if self.kind == "exact":
            return "lossless (exact)"
        if self.kind == "within":
            return f"lossless within residual {self.residual}"
        return f"not lossless: deficit {self.deficit}, residual {self.residual}"


def classify(mu: SubDist, tol: Fraction, input_weight: Fraction = Fraction(1)) -> Lossless:
    deficit = input_weight - mu.weight - mu.residual
    if deficit != 0 or mu.residual > tol:
        return Lossless("not", mu.residual, deficit, mu.error)
    if mu.residual == 0:
        return Lossless("exact")
    return Lossless("within", mu.residual)


def check_lossless(tp: TypedProgram, fuel: int = DEFAULT_FUEL, tol: Fraction = Fraction(1, 2 ** 30),
                   s: A.Stmt | None = None, m=None) -> Lossless:
    return classify(exec_stmt(tp, s, m, fuel), tol)
