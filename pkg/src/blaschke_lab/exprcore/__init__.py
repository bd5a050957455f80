"""Parsing and evaluation of function specs."""

from .ast import Node
from .grid import GridField, find_wells, sample_grid
from .parser import parse_expression, parse_function, tokenize
from .spec import (
    BlaschkeProduct,
    Expression,
    FunctionSpec,
    Polynomial,
    constant,
    eval_log_modulus,
    eval_real,
    eval_value,
    log_modulus_of,
    to_text,
)

POINT_AT_INFINITY = "inf"  # sentinel for the point at infinity; coordinates are always finite


def print_function(spec):
    """Text form that :func:`parse_function` maps back to an equivalent spec."""
    return spec.text()


__all__ = [
    "BlaschkeProduct", "Expression", "FunctionSpec", "GridField", "Node", "POINT_AT_INFINITY",
    "Polynomial", "constant", "eval_log_modulus", "eval_real", "eval_value", "find_wells",
    "log_modulus_of", "parse_expression", "parse_function", "print_function", "sample_grid",
    "to_text", "tokenize",
]
