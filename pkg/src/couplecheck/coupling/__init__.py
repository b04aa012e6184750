"""Couplings: f-couplings, Psi-coupling search, and the fundamental lemma."""
from .core import (Conclusion, CouplingWitness, Infeasible, PointwiseVerdict, check_f_coupling,
                   f_witness, find_coupling, fundamental_lemma, pointwise_eq_check)

__all__ = ["Conclusion", "CouplingWitness", "Infeasible", "PointwiseVerdict", "check_f_coupling",
           "f_witness", "find_coupling", "fundamental_lemma", "pointwise_eq_check"]
