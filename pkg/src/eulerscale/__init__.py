"""Explicit Fourier-side solutions of the Euler equations on the 3-torus.

Exact term algebra, bump oracles, the two-way recurrence construction, a
brute-force and Galerkin verifier, multifractal and Sobolev analysis, and the
complex-data blow-up example on the 2-torus.
"""
from .bump import CompactBump, HalfBump, MultiBump, deriv_polynomial
from .complex2d import build_complex_solution, classify_blowup
from .construction import (ExpLaw, GeneratorData, LatticeFrame, PowerLaw, TableLaw,
                           build_solution, calibrate_initial_data, evaluate_physical,
                           step_down, step_up)
from .multifractal import (Classification, NOT_APPLICABLE, fit_Dq, mu_measure, predicted_Dq,
                           renyi_entropy, sobolev_norm)
from .terms import ExactCoef, TermKey, TermSeries
from .verify import branch_contrast, check_structure, galerkin_integrate, residual_report

__version__ = "0.1.0"

__all__ = [
    "CompactBump", "HalfBump", "MultiBump", "deriv_polynomial",
    "build_complex_solution", "classify_blowup",
    "ExpLaw", "GeneratorData", "LatticeFrame", "PowerLaw", "TableLaw", "build_solution",
    "calibrate_initial_data", "evaluate_physical", "step_down", "step_up",
    "Classification", "NOT_APPLICABLE", "fit_Dq", "mu_measure", "predicted_Dq",
    "renyi_entropy", "sobolev_norm",
    "ExactCoef", "TermKey", "TermSeries",
    "branch_contrast", "check_structure", "galerkin_integrate", "residual_report",
    "__version__",
]
