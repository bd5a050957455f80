"""Nonnegative subharmonic test functions on ``D minus D0`` that vanish at ``∂D``.

Built-in kinds are written in chart coordinates ``w = phi(z)`` of the domain
(``phi`` maps ``D`` onto the unit disk), so they work on every Möbius image:

* ``greenpole``: ``g_D(z, z0)`` with ``z0`` in ``D0``;
* ``loginv``: ``log 1/|w|`` (the Green's function with pole ``phi^{-1}(0)``);
* ``power``: ``(1 - |w|^2)^q``, subharmonic where ``|w|^2 >= 1/q``;
* ``custom``: any real-role FunctionSpec or vectorized callable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..domains import BOUNDARY_SAMPLES, DomainSpec
from ..errors import PreconditionError, ValidationError
from ..exprcore.spec import FunctionSpec, fmt_number

KINDS = ("greenpole", "loginv", "power", "custom")
B_INFLATION = 1.01
NEGATIVITY_TOL = 1e-9
SUBHARMONIC_TOL = 1e-6
BOUNDARY_TOL = 1e-4
NORMAL_DERIVATIVE_TOL = 1e-3
NODES_ACROSS_GAP = 32
DEFAULT_NODES_ACROSS_GAP = 48
POLE_NODES = 40


def _green_formula(w, w0):
    # harmonic continuation of the disk Green's function across |w| = 1
    gap = (1.0 - np.abs(w) ** 2) * (1.0 - abs(w0) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 0.5 * np.log1p(gap / np.abs(w - w0) ** 2)


def _power(base, q):
    # integer q: the polynomial itself is the smooth extension past ∂D
    if float(q).is_integer():
        return base ** int(q)
    return np.maximum(base, 0.0) ** q


def region_gap(domain):
    """Smallest sampled distance from ``∂D0`` to ``∂D``."""
    if domain.inner is None:
        raise PreconditionError("test functions need a domain with an inner sub-domain D0")
    pts = domain.inner.boundary_points()
    return float(np.min(domain.signed_distance(pts)))


def in_region(domain, z):
    """Membership in the open set ``D minus closure(D0)``."""
    z = np.asarray(z, dtype=complex)
    return domain.contains(z) & ~domain.inner.contains_closed(z)


@dataclass(eq=False)
class TestFunction:
    """A candidate member of the class of test functions on ``D minus D0`` bounded by ``b``.

    Calling the object gives ``v`` on ``D`` and ``0`` off ``D`` (the value of the
    boundary limit). :meth:`formula` is the unclipped smooth expression, used
    for one-sided differences at ``∂D``.
    """

    __test__ = False  # not a pytest class

    kind: str
    domain: DomainSpec
    params: dict = field(default_factory=dict)
    scale: float = 1.0
    b: float = 0.0
    b_bound: float = 0.0
    vanishes_on_boundary: bool = False
    normal_derivative_vanishes: bool = False
    validation: object = None

    def raw(self, z):
        """Unscaled, unclipped formula."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "custom":
            fn = self.params["function"]
            with np.errstate(all="ignore"):
                if isinstance(fn, FunctionSpec):
                    return np.real(fn.evaluate(z)).astype(float)
                return np.asarray(fn(z), dtype=float)
        w = self.domain.to_disk(z)
        with np.errstate(all="ignore"):
            if self.kind == "greenpole":
                return _green_formula(w, self.params["w0"])
            if self.kind == "loginv":
                aw = np.abs(w)
                return -0.5 * np.log1p((aw - 1.0) * (aw + 1.0))
            return _power(1.0 - np.abs(w) ** 2, self.params["q"])

    def formula(self, z):
        return self.scale * self.raw(z)

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.asarray(z, dtype=complex)
        inside = self.domain.contains(z)
        with np.errstate(invalid="ignore"):
            out = np.where(inside, self.formula(z), 0.0)
        return float(out) if scalar else out

    def scaled(self, a):
        """``a * v`` for ``a > 0`` (class membership and flags are preserved)."""
        if not a > 0:
            raise PreconditionError("scale factor must be positive")
        return TestFunction(self.kind, self.domain, dict(self.params), self.scale * a,
                            self.b * a, self.b_bound * a, self.vanishes_on_boundary,
                            self.normal_derivative_vanishes, self.validation)

    def describe(self):
        if self.kind == "greenpole":
            text = f"greenpole:{fmt_number(self.params['z0'])}"
        elif self.kind == "power":
            text = f"power:{self.params['q']!r}"
        elif self.kind == "custom":
            fn = self.params["function"]
            text = "custom:" + (fn.text() if isinstance(fn, FunctionSpec) else getattr(fn, "__name__", "callable"))
        else:
            text = "loginv"
        if self.scale != 1.0:
            text = f"{self.scale!r}*{text}"
        return text


def _boundary_sup(v):
    vals = v.formula(v.domain.inner.boundary_points(BOUNDARY_SAMPLES))
    return float(np.max(vals))


def make_test_function(kind, domain, strict=True, h=None, **params):
    """Build and validate a test function on ``domain`` (which must carry ``D0``).

    ``params``: ``z0`` for ``greenpole``, ``q >= 2`` for ``power``,
    ``function`` (FunctionSpec or callable) for ``custom``. With ``strict``
    a failed membership check raises :class:`ValidationError`; otherwise the
    report is attached and the flags are set from it.
    """
    if kind not in KINDS:
        raise PreconditionError(f"unknown test function kind {kind!r}")
    if domain.inner is None:
        raise PreconditionError("test functions need a domain with an inner sub-domain D0")
    if not domain.is_bounded():
        raise PreconditionError("test functions are supported on bounded domains only")
    inner = domain.inner
    params = dict(params)
    if kind == "greenpole":
        if "z0" not in params:
            raise PreconditionError("greenpole needs a pole z0")
        z0 = complex(params["z0"])
        if not bool(inner.contains(z0)):
            raise PreconditionError("the pole z0 must lie inside D0")
        params = {"z0": z0, "w0": complex(domain.to_disk(z0))}
    elif kind == "loginv":
        centre = complex(domain.from_disk(0.0))
        if not bool(inner.contains(centre)):
            raise PreconditionError("loginv needs D0 to contain the chart centre")
        params = {}
    elif kind == "power":
        q = float(params.get("q", 2.0))
        if not q >= 2:
            raise PreconditionError("power exponent q must be at least 2")
        # subharmonic exactly where |w|^2 >= 1/q in chart coordinates
        core = 1.0 / math.sqrt(q)
        w = np.abs(domain.to_disk(inner.boundary_points()))
        centre = complex(domain.from_disk(0.0))
        if not (bool(inner.contains(centre)) and float(np.min(w)) >= core - 1e-12):
            raise PreconditionError(f"D0 must contain the non-subharmonic core |w| < {core:.6g}")
        params = {"q": int(q) if q == int(q) else q}
    else:
        if "function" not in params:
            raise PreconditionError("custom test function needs a function")
        params = {"function": params["function"]}
    v = TestFunction(kind, domain, params)
    v.b = max(_boundary_sup(v), 0.0)
    v.b_bound = B_INFLATION * v.b
    report = validate_test_function(v, h)
    if strict and not report.passed:
        raise ValidationError("test function failed validation: " + ", ".join(report.failures()), report)
    return v


@dataclass
class ValidationReport:
    passed: bool
    checks: dict
    flags: dict
    grid: dict

    def failures(self):
        return [name for name, c in self.checks.items() if not c["passed"]]

    def to_dict(self):
        return {"passed": self.passed, "checks": self.checks, "flags": self.flags, "grid": self.grid}


def _check(passed, value, tol, **extra):
    return {"passed": bool(passed), "value": float(value), "tolerance": float(tol), **extra}


def default_h(v):
    """Grid spacing for validation: 48 nodes across the gap, finer near a Green pole.

    The five-point stencil of a harmonic function with a singularity at
    distance ``d`` is off by about ``(h/d)^4 / 2``; ``h = d/40`` keeps that
    below the subharmonicity tolerance.
    """
    h = region_gap(v.domain) / DEFAULT_NODES_ACROSS_GAP
    if v.kind in ("greenpole", "loginv"):
        pole = v.params.get("z0", complex(v.domain.from_disk(0.0)))
        d = float(np.min(np.abs(v.domain.inner.boundary_points() - pole)))
        h = min(h, d / POLE_NODES)
    return h


def validate_test_function(v, h=None):
    """Sampled class-membership checks; failures become report entries.

    * nonnegativity on grid nodes of ``D minus closure(D0)``;
    * five-point stencil ``sum(neighbours) - 4 v >= -1e-6 (1 + max|v|)`` where
      the whole stencil lies in the region;
    * boundary limit: sup of ``v`` on parallel curves at distance ``10^-k``
      from ``∂D`` must fall below ``1e-4 (1 + max|v|)``;
    * inward normal derivative at ``∂D`` by a Richardson-extrapolated one-sided
      difference; it counts as vanishing below ``1e-3 (1 + max|v|)``.

    The flags ``vanishes_on_boundary`` and ``normal_derivative_vanishes`` of
    ``v`` are updated in place.
    """
    domain = v.domain
    gap = region_gap(domain)
    if h is None:
        h = default_h(v)
    if not h > 0:
        raise PreconditionError("grid spacing h must be positive")
    if gap / h < NODES_ACROSS_GAP:
        raise PreconditionError(f"h = {h:g} leaves fewer than {NODES_ACROSS_GAP} nodes across the gap {gap:g}")

    x0, y0, x1, y1 = domain.bbox()
    xs = np.arange(x0 - h, x1 + 1.5 * h, h)
    ys = np.arange(y0 - h, y1 + 1.5 * h, h)
    Z = xs[None, :] + 1j * ys[:, None]
    region = in_region(domain, Z)
    with np.errstate(all="ignore"):
        vals = np.asarray(v(Z), dtype=float)
    finite = region & np.isfinite(vals)
    scale = 1.0 + (float(np.max(np.abs(vals[finite]))) if finite.any() else 0.0)
    checks = {}

    vmin = float(np.min(vals[region])) if region.any() else 0.0
    checks["nonnegative"] = _check(vmin >= -NEGATIVITY_TOL * scale, vmin, -NEGATIVITY_TOL * scale)

    ok = np.zeros_like(region)
    ok[1:-1, 1:-1] = (finite[1:-1, 1:-1] & finite[:-2, 1:-1] & finite[2:, 1:-1]
                      & finite[1:-1, :-2] & finite[1:-1, 2:])
    with np.errstate(invalid="ignore"):
        stencil = (vals[:-2, 1:-1] + vals[2:, 1:-1] + vals[1:-1, :-2] + vals[1:-1, 2:]
                   - 4.0 * vals[1:-1, 1:-1])
    inner_ok = ok[1:-1, 1:-1]
    worst = float(np.min(stencil[inner_ok])) if inner_ok.any() else 0.0
    tol_sh = SUBHARMONIC_TOL * scale
    checks["subharmonic"] = _check(worst >= -tol_sh, worst, -tol_sh, stencils=int(inner_ok.sum()))

    collars = []
    for k in range(1, 7):
        t = 10.0 ** (-k)
        if t >= gap:
            continue
        pts = domain.parallel_curve(t, BOUNDARY_SAMPLES)
        pts = pts[~domain.inner.contains_closed(pts)]
        sup = float(np.max(v(pts))) if len(pts) else 0.0
        collars.append({"distance": t, "sup": sup})
    limit = collars[-1]["sup"] if collars else float("inf")
    tol_b = BOUNDARY_TOL * scale
    checks["boundary_limit"] = _check(abs(limit) <= tol_b, limit, tol_b, collars=collars)

    p = domain.boundary_points(BOUNDARY_SAMPLES)
    n = domain.inward_normal(p)
    t = min(1e-3, gap / 4.0)
    with np.errstate(all="ignore"):
        v0 = v.formula(p)
        d_full = (v.formula(p + t * n) - v0) / t
        d_half = (v.formula(p + 0.5 * t * n) - v0) / (0.5 * t)
    deriv = 2.0 * d_half - d_full
    dmax = float(np.max(np.abs(deriv)))
    tol_n = NORMAL_DERIVATIVE_TOL * scale
    checks["normal_derivative"] = _check(True, dmax, tol_n, vanishes=bool(dmax <= tol_n),
                                         mean=float(np.mean(deriv)))

    flags = {
        "vanishes_on_boundary": bool(checks["boundary_limit"]["passed"]),
        "normal_derivative_vanishes": bool(checks["boundary_limit"]["passed"] and dmax <= tol_n),
    }
    v.vanishes_on_boundary = flags["vanishes_on_boundary"]
    v.normal_derivative_vanishes = flags["normal_derivative_vanishes"]
    passed = all(checks[k]["passed"] for k in ("nonnegative", "subharmonic", "boundary_limit"))
    report = ValidationReport(passed, checks, flags, {"h": float(h), "nodes": int(region.sum())})
    v.validation = report
    return report
