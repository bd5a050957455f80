"""Verdict-carrying reports with deterministic JSON serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

HOLDS = "HOLDS"
FAILS = "FAILS"
INCONCLUSIVE = "INCONCLUSIVE"
VERDICTS = (HOLDS, FAILS, INCONCLUSIVE)


def json_number(x):
    """Float rounded to 15 significant digits; non-finite values become strings."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.15g}")


def clean(obj):
    """Recursively convert numpy scalars/arrays and complex numbers into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return json_number(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": json_number(obj.real), "im": json_number(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj):
    return json.dumps(clean(obj), sort_keys=True, indent=2) + "\n"


@dataclass
class ConditionReport:
    """Outcome of one condition check together with the numbers behind it."""

    condition: str
    verdict: str
    lhs: float = float("nan")
    rhs: float = float("nan")
    constants: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def holds(self):
        return self.verdict == HOLDS

    def to_dict(self):
        return clean({
            "condition": self.condition,
            "verdict": self.verdict,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constants": self.constants,
            "trace": self.trace,
            "grid": self.grid,
            "tolerances": self.tolerances,
            "inputs": self.inputs,
            "details": self.details,
            "notes": self.notes,
        })

    def to_json(self):
        return dumps(self.to_dict())


def combine_verdicts(verdicts):
    """FAILS dominates, then INCONCLUSIVE; an empty list HOLDS."""
    verdicts = list(verdicts)
    if FAILS in verdicts:
        return FAILS
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return HOLDS
