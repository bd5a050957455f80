"""Blaschke-type sums over zeros, majorant checks and the implication between them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EvaluationError, PreconditionError
from ..exprcore.grid import GridField
from ..exprcore.spec import BlaschkeProduct, FunctionSpec, log_modulus_of
from ..potential.measures import MeasureEstimate, RegionFilter, integrate_measure, riesz_charge
from ..zerolocator import ZeroSequence, zero_counting_measure, zeros_of
from .report import FAILS, HOLDS, INCONCLUSIVE, ConditionReport
from .testfunctions import in_region

DIVERGENT = "DIVERGENT"
CONVERGENT = "CONVERGENT"
TAIL_DIVERGENT_SLOPE = -1.0 - 0.02
TAIL_CONVERGENT_SLOPE = -1.1
TAIL_MIN_TERMS = 20
MAJORANT_TOL = 1e-9
DEFAULT_H = 1.0 / 256


def zero_data(Z):
    """``(locations, multiplicities, truncated)`` from a ZeroSequence or a plain list.

    Plain lists hold complex numbers or ``(location, multiplicity)`` pairs and
    keep their order.
    """
    if isinstance(Z, ZeroSequence):
        return Z.locations(), Z.multiplicities().astype(float), bool(Z.truncated)
    locs, mults = [], []
    for item in Z:
        if isinstance(item, (tuple, list)):
            locs.append(complex(item[0]))
            mults.append(float(item[1]))
        else:
            locs.append(complex(item))
            mults.append(1.0)
    return np.array(locs, dtype=complex), np.array(mults, dtype=float), False


@dataclass
class SumTrace:
    """Partial sums of ``v(z_k)`` (with multiplicity) over the zeros lying in ``D minus D0``."""

    indices: np.ndarray
    locations: np.ndarray
    terms: np.ndarray
    partial_sums: np.ndarray
    truncated: bool = False
    skipped: int = 0

    @property
    def total(self):
        return float(self.partial_sums[-1]) if len(self.partial_sums) else 0.0

    def __len__(self):
        return len(self.terms)

    def rows(self):
        """``(k, |z_k|, partial sum)`` rows for plotting."""
        return [(int(k), float(abs(z)), float(s))
                for k, z, s in zip(self.indices, self.locations, self.partial_sums)]

    def to_list(self):
        return [{"k": k, "abs_zk": a, "partial_sum": s} for k, a, s in self.rows()]

    def scaled_equal(self, other, a, rel=1e-12):
        return np.allclose(self.partial_sums * a, other.partial_sums, rtol=rel, atol=0)


def blaschke_functional(v, Z, truncated=None):
    """Trace of ``sum v(z_k)`` over ``z_k`` in ``D minus D0`` in the given (canonical) order.

    Zeros inside ``D0`` are skipped; zeros outside ``D`` are rejected.
    """
    domain = v.domain
    locs, mults, trunc = zero_data(Z)
    if truncated is not None:
        trunc = bool(truncated)
    if len(locs) and not np.all(domain.contains(locs)):
        raise PreconditionError("zero sequence leaves the domain D")
    keep = ~domain.inner.contains(locs) if len(locs) else np.zeros(0, dtype=bool)
    idx = np.nonzero(keep)[0]
    vals = np.asarray(v(locs[idx]), dtype=float) * mults[idx]
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("test function is infinite at a zero")
    return SumTrace(idx + 1, locs[idx], vals, np.cumsum(vals), trunc, int(len(locs) - len(idx)))


def tail_slope(trace):
    """Least-squares slope of ``log term`` against ``log k`` over the second half of the trace."""
    pos = trace.terms > 0
    k = trace.indices[pos].astype(float)
    t = trace.terms[pos]
    if len(t) < TAIL_MIN_TERMS:
        return None
    k, t = k[len(k) // 2:], t[len(t) // 2:]
    slope, _ = np.polyfit(np.log(k), np.log(t), 1)
    return float(slope)


def classify_series(trace, bound=None):
    """Classify a nonnegative trace as CONVERGENT, DIVERGENT or INCONCLUSIVE.

    A finite (non-truncated) sequence has a finite sum. A truncated one counts
    as divergent when it exceeds the user ``bound`` or when the fitted tail
    decays no faster than ``k^-1``; as convergent when the tail decays like
    ``k^-1.1`` or faster; otherwise the data are inconclusive.
    """
    out = {"classification": INCONCLUSIVE, "total": trace.total, "terms": len(trace),
           "truncated": trace.truncated, "bound": bound, "exceeds_at": None, "tail_slope": None}
    if bound is not None:
        over = np.nonzero(trace.partial_sums > bound)[0]
        if len(over):
            out["exceeds_at"] = int(trace.indices[over[0]])
    if not trace.truncated:
        out["classification"] = CONVERGENT
        out["reason"] = "finite sequence"
        return out
    if out["exceeds_at"] is not None:
        out["classification"] = DIVERGENT
        out["reason"] = "partial sums exceed the bound"
        return out
    slope = tail_slope(trace)
    out["tail_slope"] = slope
    if slope is None:
        out["reason"] = "too few terms for a tail fit"
    elif slope >= TAIL_DIVERGENT_SLOPE:
        out["classification"] = DIVERGENT
        out["reason"] = "tail decays no faster than 1/k"
    elif slope <= TAIL_CONVERGENT_SLOPE:
        out["classification"] = CONVERGENT
        out["reason"] = "tail decays faster than k^-1.1"
    else:
        out["reason"] = "tail slope between -1.1 and -1"
    return out


# -- majorants ---------------------------------------------------------------------

def as_real_role(spec):
    """Holomorphic-only variants (Blaschke products) enter real roles as ``log|B|``."""
    if isinstance(spec, BlaschkeProduct):
        return log_modulus_of(spec)
    return spec


def _values_real(M, z):
    if isinstance(M, GridField):
        return M.interpolate(z)
    if isinstance(M, FunctionSpec):
        with np.errstate(all="ignore"):
            return np.real(M.evaluate(z)).astype(float)
    if callable(M):
        return np.asarray(M(z), dtype=float)
    return np.full(np.shape(z), float(M))


def region_nodes(domain, h):
    x0, y0, x1, y1 = domain.bbox()
    xs = np.arange(x0, x1 + 0.5 * h, h)
    ys = np.arange(y0, y1 + 0.5 * h, h)
    Z = (xs[None, :] + 1j * ys[:, None]).ravel()
    return Z[in_region(domain, Z)]


@dataclass
class MajorantReport:
    holds: bool
    worst_violation: float
    worst_point: complex
    nodes: int
    tolerance: float
    h: float
    role: str = "logabs"
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {"holds": self.holds, "worst_violation": self.worst_violation,
                "worst_point": self.worst_point, "nodes": self.nodes,
                "tolerance": self.tolerance, "h": self.h, "role": self.role}


def verify_majorant(lhs, M, domain, h=1.0 / 128, role="logabs", tol=MAJORANT_TOL):
    """``lhs <= M + tol`` on every grid node of ``D minus closure(D0)``.

    ``role="logabs"`` reads ``lhs`` as a holomorphic ``f`` and compares
    ``log|f|``; ``role="real"`` compares the real-role value of ``lhs``.
    Nodes where ``lhs = -inf`` impose nothing.
    """
    if role not in ("logabs", "real"):
        raise PreconditionError("role must be 'logabs' or 'real'")
    z = region_nodes(domain, h)
    with np.errstate(all="ignore"):
        if role == "logabs":
            if isinstance(lhs, FunctionSpec):
                left = np.log(np.abs(lhs.evaluate(z)))
            else:
                left = np.full(z.shape, np.log(abs(complex(lhs))))
        else:
            left = _values_real(as_real_role(lhs), z)
        right = _values_real(M, z)
        diff = left - right
    diff = np.where(np.isneginf(left) | np.isposinf(right), -np.inf, diff)
    diff = np.where(np.isnan(diff), np.inf, diff)
    if not len(diff):
        return MajorantReport(True, float("-inf"), complex("nan"), 0, tol, h, role)
    k = int(np.argmax(diff))
    worst = float(diff[k])
    return MajorantReport(worst <= tol, worst, complex(z[k]), int(len(z)), tol, h, role)


# -- charges -----------------------------------------------------------------------

def charge_of(M, domain, h=DEFAULT_H, method="auto"):
    """Riesz charge of a real-role input over ``D`` (numbers carry none)."""
    if isinstance(M, MeasureEstimate):
        return M
    if isinstance(M, (int, float)):
        return MeasureEstimate.zero()
    return riesz_charge(as_real_role(M), domain.without_inner(), h=h, method=method)


def _spec_text(x):
    if x is None:
        return None
    if hasattr(x, "text"):
        return x.text()
    if hasattr(x, "describe"):
        return x.describe()
    return str(x)


def check_implication(f, M, v, Z=None, h=DEFAULT_H, bound=None, method="auto", majorant_h=1.0 / 128):
    """Both sides of the implication ``integral of v d(nu_M) < inf  =>  sum v(z_k) < inf``.

    ``f`` may be ``None`` when an external zero list ``Z`` is supplied; the
    majorization is then taken as claimed rather than checked. A divergent
    trace together with a finite integral and a valid majorant contradicts the
    implication for nonzero ``f`` and raises the uniqueness flag.
    """
    domain = v.domain
    notes = ["the bound b on ∂D0 is not required for this implication"]
    majorant = None
    if f is not None:
        majorant = verify_majorant(f, M, domain, h=majorant_h)
        if not majorant.holds:
            raise PreconditionError(
                f"log|f| <= M fails by {majorant.worst_violation:.6g} at {majorant.worst_point}")
    else:
        if Z is None:
            raise PreconditionError("either f or a zero list Z is required")
        notes.append("majorization claimed, not checked (no f supplied)")
    if Z is None:
        Z = zeros_of(f, domain.without_inner())
    nu = charge_of(M, domain, h, method)
    integral = integrate_measure(v, nu, RegionFilter.annulus_part(domain))
    trace = blaschke_functional(v, Z)
    series = classify_series(trace, bound)
    flags = {"uniqueness": False}
    finite_integral = bool(np.isfinite(integral))
    if not finite_integral:
        verdict = HOLDS
        notes.append("integral is infinite: the implication holds vacuously")
    elif series["classification"] == DIVERGENT:
        verdict = FAILS
        flags["uniqueness"] = True
        notes.append("f must be identically zero: divergent sum with finite integral contradicts nonzero f")
    elif series["classification"] == CONVERGENT:
        verdict = HOLDS
    else:
        verdict = INCONCLUSIVE
    c_prime = max(0.0, trace.total - integral) if finite_integral else float("nan")
    return ConditionReport(
        condition="implication",
        verdict=verdict,
        lhs=integral,
        rhs=trace.total,
        constants={"C_prime": c_prime},
        trace=trace.to_list(),
        grid={"h": h, "nodes": int(len(nu.cell_masses))},
        tolerances={"majorant": MAJORANT_TOL, "tail_divergent_slope": TAIL_DIVERGENT_SLOPE,
                    "tail_convergent_slope": TAIL_CONVERGENT_SLOPE},
        inputs={"f": _spec_text(f), "M": _spec_text(M), "v": v.describe(),
                "domain": domain.describe()},
        details={"series": series, "flags": flags, "majorant": majorant.to_dict() if majorant else None,
                 "charge_method": "atomic" if len(nu.cell_masses) == 0 else "grid",
                 "zeros_in_region": len(trace), "zeros_skipped_in_D0": trace.skipped},
        notes=notes,
    )


def estimate_C_prime(nu, M, v_family, domain=None, b=None, h=DEFAULT_H, method="auto"):
    """``max(0, max over v of (integral v d(nu) - integral v d(nu_M)))`` over ``D minus D0``.

    ``nu`` is a MeasureEstimate or a zero list (read as its counting measure).
    """
    family = list(v_family) if isinstance(v_family, (list, tuple)) else [v_family]
    if not family:
        raise PreconditionError("empty test function family")
    domain = domain or family[0].domain
    if b is not None:
        for v in family:
            if v.b > b * (1 + 1e-12):
                raise PreconditionError(f"test function {v.describe()} exceeds the bound b on ∂D0")
    if not isinstance(nu, MeasureEstimate):
        nu = zero_counting_measure(nu) if isinstance(nu, ZeroSequence) else \
            MeasureEstimate.from_atoms(*zero_data(nu)[:2])
    nu_M = charge_of(M, domain, h, method)
    where = RegionFilter.annulus_part(domain)
    best = 0.0
    for v in family:
        best = max(best, integrate_measure(v, nu, where) - integrate_measure(v, nu_M, where))
    return float(best)
