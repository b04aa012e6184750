"""Checking a proof file against every ground instance of its judgment family."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..lang import ast as A
from ..report import fmt_q
from ..semantics import DEFAULT_FUEL
from .checker import Verdict, check_proof
from .judgment import JudgmentSpec, ScriptError, instantiate_family
from .semantic import seed_states


@dataclass
class FamilyVerdict:
    name: str
    verdicts: list = field(default_factory=list)
    residual: Fraction = Fraction(0)

    @property
    def ok(self) -> bool:
        return bool(self.verdicts) and all(v.accepted for v in self.verdicts)

    @property
    def rejected(self) -> list:
        return [v for v in self.verdicts if not v.accepted]

    def to_dict(self) -> dict:
        return {
            "type": "proof", "name": self.name, "accepted": self.ok,
            "instances": len(self.verdicts), "rejected": len(self.rejected),
            "residual": self.residual,
            "failures": [{"instance": v.instance, "path": v.error.path, "rule": v.error.rule,
                          "reason": v.error.reason, "counterexample": v.error.counterexample}
                         for v in self.rejected],
        }

    def lines(self) -> list:
        word = "ACCEPTED" if self.ok else "REJECTED"
        out = [f"PROOF {self.name}: {word} ({len(self.verdicts)} instance(s), "
               f"{len(self.rejected)} rejected)"]
        if self.residual:
            out.append(f"  largest loop residual in lossless obligations: {fmt_q(self.residual, True)}")
        for v in self.rejected[:5]:
            out.append(f"  {v}")
        if len(self.rejected) > 5:
            out.append(f"  ... {len(self.rejected) - 5} more")
        return out


def _residual(v: Verdict) -> Fraction:
    best = Fraction(0)
    for ob in v.log:
        best = max(best, ob.residual)
    return best


def prove_family(source: A.Program, spec: JudgmentSpec, bindings: dict | None = None,
                 fuel: int = DEFAULT_FUEL, tol: Fraction = Fraction(1, 2 ** 30),
                 seed_enum: bool = False, pins: dict | None = None) -> FamilyVerdict:
    """Run ``spec.proof`` on each instance; ``pins`` fixes some meta-parameters."""
    if spec.proof is None:
        raise ScriptError("the judgment file has no :proof")
    out = FamilyVerdict(spec.name or source.name)
    for j in instantiate_family(spec, source, bindings or {}, only=pins):
        seeds = None
        if seed_enum:
            seeds = (seed_states(j.left, True), seed_states(j.right, True))
        v = check_proof(j, spec.proof, fuel, tol, seeds=seeds)
        v.instance = j.instance
        out.verdicts.append(v)
        out.residual = max(out.residual, _residual(v))
    return out
