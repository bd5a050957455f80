"""Collar condition, the majorant inequality with its constants, Green's identity and the L-bound."""

from __future__ import annotations

import math

import numpy as np

from ..domains import Circle
from ..errors import PreconditionError
from ..exprcore.spec import FunctionSpec, eval_log_modulus
from ..potential.green import GreenKernel
from ..potential.means import circular_mean, real_function, recover_value
from ..potential.measures import (
    RegionFilter,
    atomic_charge,
    hahn_jordan_split,
    integrate_measure,
    log_potential_at,
)
from .functionals import DEFAULT_H, _spec_text, _values_real, as_real_role, charge_of, verify_majorant
from .report import FAILS, HOLDS, ConditionReport, combine_verdicts
from .testfunctions import TestFunction

COLLAR_SCAN = 4000
COLLAR_SAMPLES = 512
COLLAR_TOL = 1e-13
L_TOL = 1e-9
FD_STEP = 1e-5
BOUNDARY_NODES = 4096
L_EXPONENT_NOTE = "error term read as (1+eps)*log((1+|z|)/r)"


# -- (O): collars ------------------------------------------------------------------

def _inradius(domain):
    g = domain.geometry()
    if not (isinstance(g, Circle) and g.inside):
        raise PreconditionError("collars need a bounded domain")
    return g.radius


def _collar_sup(v, domain, t):
    """``sup v`` on the parallel curves at the distances ``t`` (vectorized over ``t``)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    pts = np.stack([domain.parallel_curve(s, COLLAR_SAMPLES) for s in t])
    with np.errstate(all="ignore"):
        vals = np.asarray(v.formula(pts), dtype=float)
    vals = np.where(np.isnan(vals), np.inf, vals)
    return np.max(vals, axis=1)


def collar_margin(v, epsilon):
    """Largest ``delta`` with ``v < epsilon`` on ``{dist(z, ∂D) < delta}``, or 0 if none.

    The distance ``t`` from ``∂D`` is scanned on a geometric-plus-uniform grid
    and the first crossing is refined by bisection. ``v``'s formula is used
    past ``∂D0`` so the margin does not stop at the inner boundary.
    """
    domain = v.domain
    R = _inradius(domain)
    ts = np.unique(np.concatenate([R * np.logspace(-12, -3, 37), np.linspace(0, R, COLLAR_SCAN + 1)[1:-1]]))
    sups = _collar_sup(v, domain, ts)
    bad = np.nonzero(sups >= epsilon)[0]
    if not len(bad):
        return R
    j = int(bad[0])
    if j == 0:
        return 0.0
    lo, hi = float(ts[j - 1]), float(ts[j])
    while hi - lo > COLLAR_TOL:
        mid = 0.5 * (lo + hi)
        if _collar_sup(v, domain, mid)[0] < epsilon:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_O_condition(v, epsilons):
    """For each ``epsilon``, the collar at ``∂D`` on which ``v < epsilon``.

    HOLDS when every ``epsilon`` admits a collar of positive width.
    ``collar_radius`` is the radius of the inner edge of the collar for disk
    domains (``e^-epsilon`` for ``log 1/|z|`` on the unit disk).
    """
    domain = v.domain
    g = domain.geometry()
    rows, verdicts = [], []
    for eps in epsilons:
        if not eps > 0:
            raise PreconditionError("epsilon must be positive")
        delta = collar_margin(v, eps)
        verdict = HOLDS if delta > 0 else FAILS
        verdicts.append(verdict)
        rows.append({"epsilon": eps, "delta": delta, "collar_radius": g.radius - delta,
                     "reaches_D0": bool(delta >= float(np.min(domain.signed_distance(
                         domain.inner.boundary_points())))),
                     "verdict": verdict})
    return ConditionReport(
        condition="O",
        verdict=combine_verdicts(verdicts),
        lhs=float("nan"),
        rhs=float("nan"),
        trace=rows,
        grid={"h": float("nan"), "nodes": COLLAR_SCAN * COLLAR_SAMPLES},
        tolerances={"bisection": COLLAR_TOL, "samples_per_curve": COLLAR_SAMPLES},
        inputs={"v": v.describe(), "domain": domain.describe(), "epsilons": list(epsilons)},
        notes=["tested as v < epsilon (v is nonnegative)"],
    )


# -- (C) ------------------------------------------------------------------------------

def _value_at(spec, z, nu):
    """Real-role value at ``z``: ``-inf`` on a positive atom, else recovered from disk means."""
    if len(nu.atom_masses):
        at = (nu.atom_locations == z) & (nu.atom_masses > 0)
        if at.any():
            return float("-inf")
    if isinstance(spec, (int, float)):
        return float(spec)
    return float(recover_value(spec, z))


def _inequality_terms(v, u_spec, M_spec, nu_u, nu_M, neg_M, z0, dtilde, u0, M0):
    domain = v.domain
    annulus = RegionFilter.annulus_part(domain)
    tilde_annulus = RegionFilter(dtilde, domain.inner)
    kernel = GreenKernel(dtilde, z0)
    return {
        "v": v.describe(),
        "int_v_nu_u": integrate_measure(v, nu_u, annulus),
        "int_v_nu_M": integrate_measure(v, nu_M, annulus),
        "int_v_nu_M_minus": integrate_measure(v, neg_M, tilde_annulus),
        "int_g_nu_M": integrate_measure(kernel, nu_M, RegionFilter(dtilde)),
        "int_g_nu_M_minus": integrate_measure(kernel, neg_M, tilde_annulus),
        "u_z0": u0,
        "M_z0": M0,
        "b_v": v.b,
    }


def _minimal_C(t):
    # C u0 + A_u <= A_M + N + C (G1 + G2 + M0)  <=>  A <= C K
    A = t["int_v_nu_u"] - t["int_v_nu_M"] - t["int_v_nu_M_minus"]
    K = t["int_g_nu_M"] + t["int_g_nu_M_minus"] + t["M_z0"] - t["u_z0"]
    if A <= 0:
        return 0.0, A, K
    if K <= 0:
        return float("inf"), A, K
    return A / K, A, K


def _minimal_C_bar(t, C, b):
    # A_u <= A_M + (b + C) Cbar - C u0
    Cu0 = 0.0 if C == 0 else C * t["u_z0"]
    num = t["int_v_nu_u"] - t["int_v_nu_M"] + Cu0
    if num <= 0:
        return 0.0
    if b + C <= 0:
        return float("inf")
    return num / (b + C)


def default_dtilde(domain):
    """Chart image of ``|w| < (1 + hull)/2`` where ``hull`` bounds ``D0`` in chart coordinates."""
    return domain.concentric(0.5 * (1.0 + domain.inner_hull_radius()))


def evaluate_inequality_C(u, M, v, z0, b=None, dtilde=None, h=DEFAULT_H, method="auto",
                          majorant_h=1.0 / 128):
    """Every term of the majorant inequality, the minimal constant ``C`` and ``C̄`` in the (C) form.

    ``v`` is a TestFunction or a family of them; ``C`` is the smallest value
    serving the whole family, ``C̄`` the family supremum for that ``C``.
    """
    family = list(v) if isinstance(v, (list, tuple)) else [v]
    if not family:
        raise PreconditionError("empty test function family")
    domain = family[0].domain
    z0 = complex(z0)
    if not bool(domain.inner.contains(z0)):
        raise PreconditionError("z0 must lie in D0")
    if b is None:
        b = max(w.b_bound for w in family)
    if not b >= 0:
        raise PreconditionError("b must be nonnegative")
    for w in family:
        if w.b > b * (1 + 1e-12):
            raise PreconditionError(f"test function {w.describe()} exceeds the bound b on ∂D0")
    dtilde = dtilde or default_dtilde(domain)
    if not (dtilde.compactly_contains(domain.inner) and _inside(domain, dtilde)):
        raise PreconditionError("D̃ must satisfy D0 ⋐ D̃ ⊆ D")
    u_spec = as_real_role(u)
    M_spec = as_real_role(M)
    majorant = verify_majorant(u_spec, M_spec, domain, h=majorant_h, role="real")
    if not majorant.holds:
        raise PreconditionError(f"u <= M fails by {majorant.worst_violation:.6g} at {majorant.worst_point}")
    nu_u = charge_of(u_spec, domain, h, method)
    nu_M = charge_of(M_spec, domain, h, method)
    r_dom = 0.5 * float(domain.distance_to_boundary(z0))
    if not np.isfinite(log_potential_at(nu_M, z0, r_dom)):
        raise PreconditionError("z0 is outside dom_M")
    neg_M = hahn_jordan_split(nu_M).negative
    u0 = _value_at(u_spec, z0, nu_u)
    M0 = _value_at(M_spec, z0, nu_M)
    if not np.isfinite(M0):
        raise PreconditionError("M(z0) is not finite")
    terms = [_inequality_terms(w, u_spec, M_spec, nu_u, nu_M, neg_M, z0, dtilde, u0, M0) for w in family]
    mins = [_minimal_C(t) for t in terms]
    C = max(m[0] for m in mins)
    for t, (c, A, K) in zip(terms, mins):
        t["minimal_C"] = c
        t["A"] = A
        t["K"] = K
    C_bar = max(_minimal_C_bar(t, C, b) for t in terms) if np.isfinite(C) else float("inf")
    for t in terms:
        t["C_bar"] = _minimal_C_bar(t, C, b) if np.isfinite(C) else float("inf")
    worst = max(range(len(terms)), key=lambda k: mins[k][0])
    t = terms[worst]
    Cu0 = 0.0 if C == 0 else C * u0
    lhs = Cu0 + t["int_v_nu_u"]
    rhs = (t["int_v_nu_M"] + t["int_v_nu_M_minus"]
           + (0.0 if C == 0 else C * (t["int_g_nu_M"] + t["int_g_nu_M_minus"] + M0)))
    verdict = HOLDS if np.isfinite(C) and np.isfinite(C_bar) else FAILS
    notes = ["C and C̄ are empirical minima over the sampled family"]
    if np.isneginf(u0):
        notes.append("u(z0) = -inf: any C > 0 serves")
    return ConditionReport(
        condition="C",
        verdict=verdict,
        lhs=lhs,
        rhs=rhs,
        constants={"C": C, "C_bar": C_bar, "b": b},
        trace=terms,
        grid={"h": h, "nodes": int(len(nu_u.cell_masses) + len(nu_M.cell_masses))},
        tolerances={"majorant": majorant.tolerance},
        inputs={"u": _spec_text(u), "M": _spec_text(M), "v": [w.describe() for w in family],
                "z0": z0, "domain": domain.describe(), "dtilde": dtilde.describe()},
        details={"majorant": majorant.to_dict(),
                 "C_form": {"lhs": t["int_v_nu_u"],
                            "rhs": t["int_v_nu_M"] + (b + C) * C_bar - Cu0}},
        notes=notes,
    )


def _inside(outer, inner):
    """``inner ⊆ outer`` on sampled boundary points (closed containment)."""
    pts = inner.boundary_points()
    return bool(np.all(outer.signed_distance(pts) >= -1e-12))


# -- Green's identity ----------------------------------------------------------------

def _smooth(F):
    if isinstance(F, TestFunction):
        return F.formula
    if isinstance(F, FunctionSpec):
        F = as_real_role(F)
        return lambda z: _values_real(F, z)
    f, _ = real_function(F)
    return f


def _stencil_masses(vals, h):
    lap = np.full_like(vals, np.nan)
    lap[1:-1, 1:-1] = (vals[:-2, 1:-1] + vals[2:, 1:-1] + vals[1:-1, :-2] + vals[1:-1, 2:]
                       - 4.0 * vals[1:-1, 1:-1])
    return lap / (2.0 * np.pi)


def green_identity_terms(M, v, h=DEFAULT_H, boundary_nodes=BOUNDARY_NODES):
    """``(integral v d(nu_M), integral M d(nu_v), contour term)`` on ``D minus D0``.

    Area integrals use five-point Laplacian masses at grid nodes with exact
    cut-cell weights; the contour term ``(1/2pi) ∮ (v dM/dn - M dv/dn) ds``
    runs over ``∂D0`` with ``n`` pointing into ``D0``.
    """
    if not (v.vanishes_on_boundary and v.normal_derivative_vanishes):
        raise PreconditionError("v must vanish on ∂D together with its inward normal derivative")
    domain = v.domain
    inner = domain.inner
    fM = _smooth(M)
    fv = v.formula
    x0, y0, x1, y1 = domain.bbox()
    xs = np.arange(x0 - 2 * h, x1 + 2.5 * h, h)
    ys = np.arange(y0 - 2 * h, y1 + 2.5 * h, h)
    Z = xs[None, :] + 1j * ys[:, None]
    rects = np.column_stack([Z.real.ravel() - h / 2, Z.imag.ravel() - h / 2,
                             Z.real.ravel() + h / 2, Z.imag.ravel() + h / 2])
    weights = np.clip(domain.cell_fraction(rects) - inner.cell_fraction(rects), 0.0, 1.0)
    weights = weights.reshape(Z.shape)
    with np.errstate(all="ignore"):
        Mv = np.asarray(fM(Z), dtype=float)
        vv = np.asarray(fv(Z), dtype=float)
    atomic = atomic_charge(as_real_role(M)) if isinstance(M, FunctionSpec) else None
    use = weights > 0
    if atomic is not None and len(atomic.atom_masses) == 0:
        I_vM = 0.0
    elif atomic is not None:
        I_vM = integrate_measure(v, atomic, RegionFilter.annulus_part(domain))
    else:
        mM = _stencil_masses(Mv, h)
        I_vM = float(np.sum((weights * vv * mM)[use]))
    mv = _stencil_masses(vv, h)
    I_Mv = float(np.sum((weights * Mv * mv)[use]))
    p = inner.boundary_points(boundary_nodes)
    n = inner.inward_normal(p)
    ds = 0.5 * np.abs(np.roll(p, -1) - np.roll(p, 1))
    with np.errstate(all="ignore"):
        dM = (fM(p + FD_STEP * n) - fM(p - FD_STEP * n)) / (2 * FD_STEP)
        dv = (fv(p + FD_STEP * n) - fv(p - FD_STEP * n)) / (2 * FD_STEP)
        contour = float(np.sum((fv(p) * dM - fM(p) * dv) * ds)) / (2.0 * np.pi)
    if not all(np.isfinite([I_vM, I_Mv, contour])):
        raise PreconditionError("Green's identity terms are not finite (M must be smooth near the region)")
    return I_vM, I_Mv, contour


def green_identity_residual(M, v, h=DEFAULT_H, boundary_nodes=BOUNDARY_NODES):
    """``|R|`` with ``R = integral v d(nu_M) - integral M d(nu_v) - contour term``."""
    a, b, c = green_identity_terms(M, v, h, boundary_nodes)
    return abs(a - b - c)


def green_identity_report(M, v, h=DEFAULT_H, tol=1e-3):
    a, b, c = green_identity_terms(M, v, h)
    R = a - b - c
    return ConditionReport(
        condition="identity",
        verdict=HOLDS if abs(R) < tol else FAILS,
        lhs=a,
        rhs=b + c,
        constants={"residual": abs(R)},
        grid={"h": h, "nodes": int(round(((v.domain.bbox()[2] - v.domain.bbox()[0]) / h + 5) ** 2))},
        tolerances={"residual": tol, "fd_step": FD_STEP, "boundary_nodes": BOUNDARY_NODES},
        inputs={"M": _spec_text(M), "v": v.describe(), "domain": v.domain.describe()},
        details={"int_v_nu_M": a, "int_M_nu_v": b, "contour_term": c},
    )


# -- (L) with constraint (d) --------------------------------------------------------

def _real_at(x, z):
    if x is None:
        return 0.0
    if isinstance(x, (int, float)):
        return float(x)
    return float(_values_real(as_real_role(x), np.array([z]))[0])


def _logabs_at(f, z):
    if f is None:
        return 0.0
    if isinstance(f, FunctionSpec):
        return float(eval_log_modulus(f, z))
    return math.log(abs(complex(f))) if complex(f) != 0 else float("-inf")


def check_L_bound(u0, f, M, z, r, epsilon, domain, tol=L_TOL, nodes=2048):
    """``u0(z) + log|f(z)| <= circle mean of M + (1+eps) log((1+|z|)/r) + tol``.

    Raises :class:`PreconditionError` unless ``0 < r < min(1+|z|, dist(z, ∂D))``.
    """
    z = complex(z)
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    if domain.kind != "plane" and not bool(domain.contains(z)):
        raise PreconditionError("z must lie in D")
    dist = float(domain.distance_to_boundary(z)) if domain.kind != "plane" else float("inf")
    if not (0 < r < min(1 + abs(z), dist)):
        raise PreconditionError("constraint (d) violated: need 0 < r < min(1+|z|, dist(z, ∂D))")
    left = _real_at(u0, z) + _logabs_at(f, z)
    if isinstance(M, (int, float)):
        mean = float(M)
    else:
        mean = circular_mean(as_real_role(M), z, r, nodes=nodes)
    err = (1.0 + epsilon) * math.log((1.0 + abs(z)) / r)
    right = mean + err
    holds = left <= right + tol
    return ConditionReport(
        condition="L",
        verdict=HOLDS if holds else FAILS,
        lhs=left,
        rhs=right,
        constants={"circular_mean": mean, "error_term": err},
        grid={"h": float("nan"), "nodes": nodes},
        tolerances={"bound": tol},
        inputs={"u0": _spec_text(u0), "f": _spec_text(f), "M": _spec_text(M), "z": z, "r": r,
                "epsilon": epsilon, "domain": domain.describe()},
        notes=[L_EXPONENT_NOTE],
    )
