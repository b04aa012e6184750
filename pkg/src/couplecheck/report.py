"""Plain-text and JSON rendering of check results.

A result is anything with ``ok``, ``lines()`` and ``to_dict()``. Rationals are
written ``num/den`` in both modes and no clock readings are included, so equal
inputs give byte-identical reports.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

HEADER = "couplecheck report"


def fmt_q(q, approx: bool = False) -> str:
    """``num/den`` (or an integer); with ``approx``, large denominators get a decimal hint."""
    q = Fraction(q)
    s = str(q)
    if approx and q.denominator > 1000:
        s += f" (~{float(q):.3e})"
    return s


def jsonable(x):
    """Convert Fractions, tuples and sets into JSON-ready values."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return fmt_q(x)
    if isinstance(x, float):
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((jsonable(v) for v in x), key=repr)
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    return str(x)


@dataclass
class CheckResult:
    """Outcome of one named check: what was expected, what was observed."""

    name: str
    ok: bool
    observed: str = ""
    expected: str = ""
    provenance: str = ""
    detail: list = field(default_factory=list)
    route: str = ""

    def to_dict(self) -> dict:
        return {"type": "check", "name": self.name, "route": self.route, "ok": self.ok,
                "observed": self.observed, "expected": self.expected,
                "provenance": self.provenance, "detail": list(self.detail)}

    def lines(self) -> list:
        head = f"{'PASS' if self.ok else 'FAIL'} {self.name}"
        if self.route:
            head += f" [{self.route}]"
        out = [head]
        if self.observed:
            out.append(f"  observed: {self.observed}")
        if self.expected:
            tag = f" ({self.provenance})" if self.provenance else ""
            out.append(f"  expected: {self.expected}{tag}")
        out.extend(f"  {d}" for d in self.detail)
        return out


def summary(results) -> dict:
    results = list(results)
    passed = sum(1 for r in results if r.ok)
    return {"checks": len(results), "passed": passed, "failed": len(results) - passed}


def report_dict(results) -> dict:
    results = list(results)
    return {"report": HEADER, "results": [jsonable(r.to_dict()) for r in results],
            "summary": summary(results)}


def format_report(results, mode: str = "text") -> str:
    """Render ``results`` as text or JSON. An empty list gives the header alone."""
    results = list(results)
    if mode == "json":
        return json.dumps(report_dict(results), indent=2) + "\n"
    if mode != "text":
        raise ValueError(f"unknown report mode {mode!r}")
    out = [HEADER]
    if results:
        for r in results:
            out.extend(r.lines())
        s = summary(results)
        out.append(f"{s['checks']} check(s): {s['passed']} passed, {s['failed']} failed")
    return "\n".join(out) + "\n"
