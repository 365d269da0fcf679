"""Hadamard multipliers of the Schur-Agler class: construction and numerical certification."""
from .multipliers import (
    Multiplier,
    apply,
    bernstein,
    check_preservation_identity,
    check_schur_identity,
    diagonal_extraction,
    fejer,
    from_measure,
    from_moments,
    geometric,
    inverse_one_minus,
    shift,
)
from .norms import (
    NormEstimate,
    TuplePool,
    agler_lower_bound,
    bernstein_check,
    coefficient_upper_bound,
    operator_norm,
    sup_norm_torus,
    torus_upper_bound,
    vn_violation_search,
)
from .polyalg import MatPoly, SupportSet, eval_point, eval_tuple, hadamard, partial_derivative, support
from .tuples import CommutingTuple, DiscreteMeasure, PairedTuple, crabb_davie, holbrook, new_checked, random_generic

__version__ = "0.1.0"
