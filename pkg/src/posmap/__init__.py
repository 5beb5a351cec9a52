"""Positivity structure of linear matrix maps between matrix spaces.

A linear map taking q x q matrices to n x n matrices is handled through
two equivalent carriers, its matricization and its Choi matrix.  On top
of those the package offers the *-linearity criteria, a randomized
positivity probe with certified negatives, the complete-positivity
eigenvalue test, minimal bilinear factorizations, block-pattern
detection and classification, and closed-form solvers for the product
range of the associated structured bilinear map.  posmap.analysis
bundles everything into JSON-ready reports consumed by the command line
and the HTTP service.
"""

__version__ = "0.1.0"

from .bilinear import (ShiftInverse, StructuredMap, SurjectivityVerdict,
                       Witness, case3_real_range_test, construct_witness,
                       dependent_counterexample, membership_solve,
                       range_oracle_grid, sherman_morrison, sum_is_one,
                       surjectivity_decide)
from .errors import (AnalysisError, DimMismatch, FieldViolation,
                     IndexOutOfRange, InfeasiblePattern, KernelMismatch,
                     LengthMismatch, NotEquivalent, NotHermitian, NotInRange,
                     NotStarLinear, ParseError, PatternViolation,
                     SpanViolation, TooLarge, UnsupportedPattern)
from .hill import (HillRep, equivalence_transform, expansion_coefficients,
                   hill_from_kernel_matrix, hill_from_spec, select_blocks)
from .mapmodel import (FIELDS, MapSpec, StarLinearityReport,
                       apply_via_choi, apply_via_matricization,
                       choi_to_matricization, from_choi, from_matricization,
                       is_star_linear, matricization_to_choi, star_linearity)
from .pattern import (C2Flags, CaseInfo, Classification, StructurePattern,
                      VerdictReport, c2_flags, classify, classify_case,
                      condition_c1, detect_pattern, theorem_verdict,
                      verdict_for_pattern)
from .positivity import (CPResult, ProbeResult, evaluate_pair,
                         is_completely_positive, positivity_probe)
from .serialize import decode_map, decode_pattern, encode_map, encode_pattern

__all__ = [
    "__version__",
    "AnalysisError", "DimMismatch", "FieldViolation", "IndexOutOfRange",
    "InfeasiblePattern", "KernelMismatch", "LengthMismatch", "NotEquivalent",
    "NotHermitian", "NotInRange", "NotStarLinear", "ParseError",
    "PatternViolation", "SpanViolation", "TooLarge", "UnsupportedPattern",
    "FIELDS", "MapSpec", "StarLinearityReport", "apply_via_choi",
    "apply_via_matricization", "choi_to_matricization", "from_choi",
    "from_matricization", "is_star_linear", "matricization_to_choi",
    "star_linearity",
    "HillRep", "equivalence_transform", "expansion_coefficients",
    "hill_from_kernel_matrix", "hill_from_spec", "select_blocks",
    "CPResult", "ProbeResult", "evaluate_pair", "is_completely_positive",
    "positivity_probe",
    "C2Flags", "CaseInfo", "Classification", "StructurePattern",
    "VerdictReport", "c2_flags", "classify", "classify_case", "condition_c1",
    "detect_pattern", "theorem_verdict", "verdict_for_pattern",
    "ShiftInverse", "StructuredMap", "SurjectivityVerdict", "Witness",
    "case3_real_range_test", "construct_witness", "dependent_counterexample",
    "membership_solve", "range_oracle_grid", "sherman_morrison",
    "sum_is_one", "surjectivity_decide",
    "decode_map", "decode_pattern", "encode_map", "encode_pattern",
]
