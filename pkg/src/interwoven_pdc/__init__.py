"""Interwoven parametric down-conversion networks.

Numeric and exact-rational simulation of ring networks of two-mode squeezers,
the Bell expressions built on their coincidence statistics, a local hidden
variable linear program with certificates, and the GHZ/Hardy-type paradox.
"""
from .bell import (Behavior, SettingsProfile, SymbolicModel, genuine_tripartite_value,
                   lifted_ch_value, symmetrized_ch_value, visibility_thresholds)
from .fock import FockState, ModeId, vacuum
from .lhv import BellInequality, Certificate, LhvVerdict, lhv_feasible, phase_sweep_lp
from .network import (ConvergenceError, NetworkSpec, PartySetting, build_ring_network,
                      coincidence_probability, evolve_network)
from .paradox import degradation_budget, implication_check, paradox_gap
from .symbolic import (ProbabilityPolynomial, SymbolicState, evolve_network_symbolic,
                       probability_polynomial, series_probability)

__version__ = "0.1.0"

__all__ = [
    "Behavior", "BellInequality", "Certificate", "ConvergenceError", "FockState",
    "LhvVerdict", "ModeId", "NetworkSpec", "PartySetting", "ProbabilityPolynomial",
    "SettingsProfile", "SymbolicModel", "SymbolicState", "build_ring_network",
    "coincidence_probability", "degradation_budget", "evolve_network",
    "evolve_network_symbolic", "genuine_tripartite_value", "implication_check",
    "lhv_feasible", "lifted_ch_value", "paradox_gap", "phase_sweep_lp",
    "probability_polynomial", "series_probability", "symmetrized_ch_value", "vacuum",
    "visibility_thresholds",
]
