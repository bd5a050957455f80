"""Test functions, Blaschke-type functionals and checks of the majorant conditions."""

from .functionals import (
    CONVERGENT,
    DIVERGENT,
    MajorantReport,
    SumTrace,
    blaschke_functional,
    charge_of,
    check_implication,
    classify_series,
    estimate_C_prime,
    verify_majorant,
)
from .inequalities import (
    check_L_bound,
    check_O_condition,
    collar_margin,
    default_dtilde,
    evaluate_inequality_C,
    green_identity_report,
    green_identity_residual,
    green_identity_terms,
)
from .report import FAILS, HOLDS, INCONCLUSIVE, ConditionReport
from .testfunctions import TestFunction, ValidationReport, make_test_function, validate_test_function

__all__ = [
    "CONVERGENT", "ConditionReport", "DIVERGENT", "FAILS", "HOLDS", "INCONCLUSIVE", "MajorantReport",
    "SumTrace", "TestFunction", "ValidationReport", "blaschke_functional", "charge_of",
    "check_L_bound", "check_O_condition", "check_implication", "classify_series", "collar_margin",
    "default_dtilde", "estimate_C_prime", "evaluate_inequality_C", "green_identity_report",
    "green_identity_residual", "green_identity_terms", "make_test_function", "validate_test_function",
    "verify_majorant",
]
