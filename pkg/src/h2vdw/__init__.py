"""Dispersion coefficients of two ground-state hydrogen atoms.

Modules
-------
special_functions
    exact moments, Laguerre coefficients, Legendre values and 3-j symbols
angular
    multipole operators, channel sets and harmonic coupling
radial
    Laguerre-function Galerkin solver on the radial quadrant
perturbation
    order-by-order recursion and the (2n+1) energy rule
sos
    bound-state-only sum for C6
cli
    command-line entry point (``python -m h2vdw``)
"""
from .perturbation import CoefficientTable, build_history, run
from .sos import c6_prime, s_n

__all__ = ["run", "build_history", "CoefficientTable", "c6_prime", "s_n"]
__version__ = "0.1.0"
