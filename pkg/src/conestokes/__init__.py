"""Stokes resolvent problems on circular cones.

Operator-pencil spectra (Dirichlet Stokes and Neumann Laplace), weighted
Sobolev norms by dyadic quadrature, the weight-interval classification of
the resolvent operator, counterexample experiments at critical weights and
a Laplace-transform bridge to the evolution problem.
"""

from .cone import CircularCone, CutoffFamily, cutoff
from .fields import FDField, FieldEvaluator, JetField, builtin_field, dilated
from .neumann import NeumannEigen, mu2_plus, mu2_plus_mode, neumann_eigen, neumann_spectrum
from .norms import QuadratureSpec, WeightedNormReport, e_norm, two_piece_norm, v_norm, x_norm_upper
from .numerics import bracket_and_refine, legendre_p, lu_signed_logdet
from .sharpness import (
    DivergenceFit,
    check_l12c_identities,
    check_w1_traces,
    kernel_candidate_l12a,
    run_l6a_experiment,
    run_l6b_experiment,
    scaling_identity_check,
)
from .solvability import (
    PencilData,
    classify_operator,
    isomorphism_intervals,
    regularity_shift_ok,
    time_domain_wellposed,
)
from .spectra import PencilSpectrum, SpectralEntry
from .stokes import StokesEigen, lambda1_plus, stokes_eigenvector, stokes_pencil, stokes_spectrum
from .transform import SeparableTimeField, TemporalFactor, parseval_check, w_norm

__version__ = "0.1.0"

__all__ = [
    "CircularCone",
    "CutoffFamily",
    "cutoff",
    "FieldEvaluator",
    "JetField",
    "FDField",
    "builtin_field",
    "dilated",
    "NeumannEigen",
    "neumann_spectrum",
    "neumann_eigen",
    "mu2_plus",
    "mu2_plus_mode",
    "QuadratureSpec",
    "WeightedNormReport",
    "v_norm",
    "e_norm",
    "x_norm_upper",
    "two_piece_norm",
    "legendre_p",
    "bracket_and_refine",
    "lu_signed_logdet",
    "DivergenceFit",
    "run_l6b_experiment",
    "run_l6a_experiment",
    "check_l12c_identities",
    "check_w1_traces",
    "kernel_candidate_l12a",
    "scaling_identity_check",
    "PencilData",
    "classify_operator",
    "isomorphism_intervals",
    "regularity_shift_ok",
    "time_domain_wellposed",
    "PencilSpectrum",
    "SpectralEntry",
    "StokesEigen",
    "stokes_pencil",
    "stokes_spectrum",
    "stokes_eigenvector",
    "lambda1_plus",
    "SeparableTimeField",
    "TemporalFactor",
    "w_norm",
    "parseval_check",
]
