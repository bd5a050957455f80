"""Numerical toolkit for Blaschke-type conditions on zeros of holomorphic functions.

Subpackages: :mod:`.exprcore` (function specs), :mod:`.potential` (Green's
functions, averages, Riesz charges), :mod:`.conditions` (test functions and
condition checks); :mod:`.zerolocator` finds zeros and :mod:`.cli` is the
command-line front-end.
"""

from .conditions import (
    ConditionReport,
    TestFunction,
    blaschke_functional,
    check_implication,
    check_L_bound,
    check_O_condition,
    classify_series,
    estimate_C_prime,
    evaluate_inequality_C,
    green_identity_residual,
    make_test_function,
    validate_test_function,
    verify_majorant,
)
from .domains import DomainSpec, disk, moebius_image, unit_disk, whole_plane
from .errors import (
    BlaschkeLabError,
    ContourConvergenceError,
    DomainError,
    EvaluationError,
    ParseError,
    PreconditionError,
    SubdivisionBudgetError,
    ValidationError,
    ZeroOnContourError,
)
from .exprcore import BlaschkeProduct, GridField, Polynomial, parse_function, print_function, sample_grid
from .potential import (
    MeasureEstimate,
    circular_mean,
    disk_mean,
    green_domain,
    green_unit_disk,
    hahn_jordan_split,
    integrate_measure,
    riesz_charge,
    riesz_measure_grid,
)
from .zerolocator import Contour, ZeroSequence, locate_zeros, winding_number, zero_counting_measure, zeros_of

__all__ = [
    "BlaschkeLabError", "BlaschkeProduct", "ConditionReport", "Contour", "ContourConvergenceError",
    "DomainError", "DomainSpec", "EvaluationError", "GridField", "MeasureEstimate", "ParseError",
    "Polynomial", "PreconditionError", "SubdivisionBudgetError", "TestFunction", "ValidationError",
    "ZeroOnContourError", "ZeroSequence", "blaschke_functional", "check_L_bound", "check_O_condition",
    "check_implication", "circular_mean", "classify_series", "disk", "disk_mean", "estimate_C_prime",
    "evaluate_inequality_C", "green_domain", "green_identity_residual", "green_unit_disk",
    "hahn_jordan_split", "integrate_measure", "locate_zeros", "make_test_function", "moebius_image",
    "parse_function", "print_function", "riesz_charge", "riesz_measure_grid", "sample_grid",
    "unit_disk", "validate_test_function", "verify_majorant", "whole_plane", "winding_number",
    "zero_counting_measure", "zeros_of",
]
