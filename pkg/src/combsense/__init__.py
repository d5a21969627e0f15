"""Simulator for remote sensing with entangled frequency-comb interferometry.

Closed-form photo-counts, visibility, Wigner functions, link budgets, and
phase-estimation bounds, each cross-validated against independent truncated
Fock-space evaluations.
"""

__version__ = "0.1.0"
