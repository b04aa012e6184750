"""pRHL judgments: proof-script checking and semantic validation."""
from .checker import Checker, Obligation, Rejected, Verdict, check_proof
from .judgment import (Judgment, JudgmentSpec, Node, ScriptError, ground, instantiate_family,
                       parse_judgment, parse_script)
from .family import FamilyVerdict, prove_family
from .semantic import SemanticVerdict, seed_states, validate_semantic

__all__ = ["Checker", "Obligation", "Rejected", "Verdict", "check_proof", "Judgment", "JudgmentSpec",
           "Node", "ScriptError", "ground", "instantiate_family", "parse_judgment", "parse_script",
           "SemanticVerdict", "seed_states", "validate_semantic", "FamilyVerdict", "prove_family"]
