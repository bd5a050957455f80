"""Signed measures made of point masses and grid cells.

Riesz charges are estimated from sampled fields with the five-point
Laplacian, ``mass = (1/2pi) * (sum of 4 neighbours - 4 u)``. Nodes whose
stencil touches an infinite sample are gathered into rectangular patches;
a patch's mass is the discrete flux through its border, which equals the sum
the stencil would have produced and needs only the finite border values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..domains import DomainSpec
from ..errors import EvaluationError, PreconditionError
from ..exprcore import ast
from ..exprcore.grid import sample_grid
from ..exprcore.spec import BlaschkeProduct, Expression, Polynomial

TWO_PI = 2.0 * np.pi
PATCH_RADIUS = 2


@dataclass(frozen=True, eq=False)
class MeasureEstimate:
    """Atoms ``(location, mass)`` plus optional cells ``([x0, y0, x1, y1], mass)``."""

    atom_locations: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    atom_masses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cell_rects: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    cell_masses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    signed: bool = False
    flags: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atom_locations", np.asarray(self.atom_locations, dtype=complex).ravel())
        object.__setattr__(self, "atom_masses", np.asarray(self.atom_masses, dtype=float).ravel())
        object.__setattr__(self, "cell_rects", np.asarray(self.cell_rects, dtype=float).reshape(-1, 4))
        object.__setattr__(self, "cell_masses", np.asarray(self.cell_masses, dtype=float).ravel())
        if len(self.atom_locations) != len(self.atom_masses):
            raise ValueError("atom locations and masses differ in length")
        if len(self.cell_rects) != len(self.cell_masses):
            raise ValueError("cell rectangles and masses differ in length")
        if not self.signed and (np.any(self.atom_masses < 0) or np.any(self.cell_masses < 0)):
            raise ValueError("unsigned measure with negative mass")

    @classmethod
    def from_atoms(cls, locations, masses, signed=False):
        return cls(np.asarray(locations, dtype=complex), np.asarray(masses, dtype=float), signed=signed)

    @classmethod
    def zero(cls):
        return cls()

    def cell_centers(self):
        r = self.cell_rects
        return 0.5 * (r[:, 0] + r[:, 2]) + 0.5j * (r[:, 1] + r[:, 3])

    def carriers(self):
        return np.concatenate([self.atom_locations, self.cell_centers()])

    def masses(self):
        return np.concatenate([self.atom_masses, self.cell_masses])

    def total_mass(self):
        return float(np.sum(self.atom_masses) + np.sum(self.cell_masses))

    def total_variation(self):
        return float(np.sum(np.abs(self.atom_masses)) + np.sum(np.abs(self.cell_masses)))

    def absolute(self):
        return MeasureEstimate(self.atom_locations, np.abs(self.atom_masses),
                               self.cell_rects, np.abs(self.cell_masses), False, self.flags)

    def scaled(self, a):
        return MeasureEstimate(self.atom_locations, a * self.atom_masses, self.cell_rects,
                               a * self.cell_masses, self.signed or a < 0, self.flags)

    def __add__(self, other):
        return MeasureEstimate(
            np.concatenate([self.atom_locations, other.atom_locations]),
            np.concatenate([self.atom_masses, other.atom_masses]),
            np.concatenate([self.cell_rects, other.cell_rects]),
            np.concatenate([self.cell_masses, other.cell_masses]),
            True, self.flags + other.flags)

    def to_dict(self):
        return {
            "atoms": [{"re": float(p.real), "im": float(p.imag), "mass": float(m)}
                      for p, m in zip(self.atom_locations, self.atom_masses)],
            "cells": [{"rect": [float(x) for x in r], "mass": float(m)}
                      for r, m in zip(self.cell_rects, self.cell_masses)],
            "signed": bool(self.signed),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        atoms = data.get("atoms", [])
        cells = data.get("cells", [])
        return cls(
            np.array([complex(a["re"], a["im"]) for a in atoms], dtype=complex),
            np.array([a["mass"] for a in atoms], dtype=float),
            np.array([c["rect"] for c in cells], dtype=float).reshape(-1, 4),
            np.array([c["mass"] for c in cells], dtype=float),
            bool(data.get("signed", False)),
        )


@dataclass(frozen=True, eq=False)
class ChargeSplit:
    positive: MeasureEstimate
    negative: MeasureEstimate

    def recombined(self):
        p, n = self.positive, self.negative
        return MeasureEstimate(p.atom_locations, p.atom_masses - n.atom_masses,
                               p.cell_rects, p.cell_masses - n.cell_masses, True)

    def variation(self):
        p, n = self.positive, self.negative
        return MeasureEstimate(p.atom_locations, p.atom_masses + n.atom_masses,
                               p.cell_rects, p.cell_masses + n.cell_masses, False)


def hahn_jordan_split(nu):
    """Split each carrier by the sign of its mass; supports stay aligned with ``nu``."""
    pa = np.where(nu.atom_masses > 0, nu.atom_masses, 0.0)
    na = np.where(nu.atom_masses < 0, -nu.atom_masses, 0.0)
    pc = np.where(nu.cell_masses > 0, nu.cell_masses, 0.0)
    nc = np.where(nu.cell_masses < 0, -nu.cell_masses, 0.0)
    return ChargeSplit(
        MeasureEstimate(nu.atom_locations, pa, nu.cell_rects, pc, False, nu.flags),
        MeasureEstimate(nu.atom_locations, na, nu.cell_rects, nc, False, nu.flags),
    )


# -- Riesz charge from a grid -----------------------------------------------------

def riesz_measure_grid(field):
    """Signed Riesz charge ``(1/2pi) Laplacian`` of a sampled field, one cell per interior node."""
    v = field.values
    m = field.mask
    ny, nx = v.shape
    if nx < 5 or ny < 5:
        raise PreconditionError("grid too small: need at least a 3x3 interior")
    h = field.h

    interior = np.zeros_like(m)
    interior[1:-1, 1:-1] = (m[1:-1, 1:-1] & m[:-2, 1:-1] & m[2:, 1:-1]
                            & m[1:-1, :-2] & m[1:-1, 2:])
    finite = m & np.isfinite(v)
    singular = m & np.isinf(v)

    regular = np.zeros_like(m)
    regular[1:-1, 1:-1] = (interior[1:-1, 1:-1] & finite[1:-1, 1:-1] & finite[:-2, 1:-1]
                           & finite[2:, 1:-1] & finite[1:-1, :-2] & finite[1:-1, 2:])
    lap = np.zeros_like(v)
    with np.errstate(invalid="ignore"):
        lap[1:-1, 1:-1] = (v[:-2, 1:-1] + v[2:, 1:-1] + v[1:-1, :-2] + v[1:-1, 2:]
                           - 4.0 * v[1:-1, 1:-1])

    flags = []
    patch_rects, patch_masses = [], []
    covered = np.zeros_like(m)
    if singular.any():
        boxes = _patch_boxes(singular, PATCH_RADIUS)
        for (iy0, iy1, ix0, ix1) in boxes:
            block = (slice(iy0, iy1 + 1), slice(ix0, ix1 + 1))
            ok = iy0 >= 1 and ix0 >= 1 and iy1 <= ny - 2 and ix1 <= nx - 2
            if ok:
                ok = bool(interior[block].all())
            if ok:
                flux = _box_flux(v, iy0, iy1, ix0, ix1)
                ok = np.isfinite(flux)
            if not ok:
                flags.append(f"unresolved singular patch rows {iy0}-{iy1} cols {ix0}-{ix1}")
                covered[block] = True
                continue
            covered[block] = True
            x0 = field.lower_left.real + h * (ix0 - 0.5)
            y0 = field.lower_left.imag + h * (iy0 - 0.5)
            x1 = field.lower_left.real + h * (ix1 + 0.5)
            y1 = field.lower_left.imag + h * (iy1 + 0.5)
            patch_rects.append([x0, y0, x1, y1])
            patch_masses.append(flux / TWO_PI)

    use = regular & ~covered
    iy, ix = np.nonzero(use)
    cx = field.lower_left.real + h * ix
    cy = field.lower_left.imag + h * iy
    rects = np.column_stack([cx - h / 2, cy - h / 2, cx + h / 2, cy + h / 2])
    masses = lap[iy, ix] / TWO_PI
    if patch_rects:
        rects = np.vstack([rects, np.array(patch_rects)])
        masses = np.concatenate([masses, np.array(patch_masses)])
    return MeasureEstimate(cell_rects=rects, cell_masses=masses, signed=True, flags=tuple(flags))


def _patch_boxes(singular, radius):
    grown = ndimage.binary_dilation(singular, structure=np.ones((2 * radius + 1, 2 * radius + 1), bool))
    labels, _ = ndimage.label(grown)
    boxes = [(s[0].start, s[0].stop - 1, s[1].start, s[1].stop - 1)
             for s in ndimage.find_objects(labels) if s is not None]
    merged = True
    while merged:
        merged = False
        out = []
        for b in boxes:
            for k, o in enumerate(out):
                if not (b[1] + 1 < o[0] or o[1] + 1 < b[0] or b[3] + 1 < o[2] or o[3] + 1 < b[2]):
                    out[k] = (min(b[0], o[0]), max(b[1], o[1]), min(b[2], o[2]), max(b[3], o[3]))
                    merged = True
                    break
            else:
                out.append(b)
        boxes = out
    return sorted(boxes)


def _box_flux(v, iy0, iy1, ix0, ix1):
    """Sum of ``u_out - u_in`` over stencil edges leaving the node box."""
    rows = slice(iy0, iy1 + 1)
    cols = slice(ix0, ix1 + 1)
    parts = [
        v[iy0 - 1, cols] - v[iy0, cols],
        v[iy1 + 1, cols] - v[iy1, cols],
        v[rows, ix0 - 1] - v[rows, ix0],
        v[rows, ix1 + 1] - v[rows, ix1],
    ]
    return float(np.sum(np.concatenate(parts)))


# -- region filters ---------------------------------------------------------------

class RegionFilter:
    """Membership in ``outer`` minus ``hole`` (either may be ``None``).

    Atoms are tested pointwise. Cells use their centre (midpoint rule) unless
    ``cut_cells`` is set, in which case each cell is weighted by the exact
    fraction of its area inside the region.
    """

    def __init__(self, outer=None, hole=None, cut_cells=False, closed_hole=False):
        self.outer = outer
        self.hole = hole
        self.cut_cells = cut_cells
        self.closed_hole = closed_hole

    @classmethod
    def annulus_part(cls, domain, cut_cells=False):
        """``D minus D0`` for a DomainSpec with inner sub-domain."""
        return cls(domain.without_inner() if domain.inner is not None else domain, domain.inner,
                   cut_cells)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        keep = np.ones(z.shape, dtype=bool)
        if self.outer is not None:
            keep &= self.outer.contains(z)
        if self.hole is not None:
            keep &= ~(self.hole.contains_closed(z) if self.closed_hole else self.hole.contains(z))
        return keep

    def cell_weights(self, rects, centers):
        if not self.cut_cells:
            return self(centers).astype(float)
        w = np.ones(len(rects))
        if self.outer is not None:
            w = self.outer.cell_fraction(rects)
        if self.hole is not None:
            w = w - self.hole.cell_fraction(rects)
        return np.clip(w, 0.0, 1.0)


def annulus_filter(r_min, r_max, center=0j):
    """``r_min <= |z - center| < r_max`` as a plain predicate."""
    def keep(z):
        d = np.abs(np.asarray(z, dtype=complex) - center)
        return (d >= r_min) & (d < r_max)
    return keep


# -- integration ------------------------------------------------------------------

def _as_callable(v):
    if isinstance(v, (Expression, Polynomial, BlaschkeProduct)):
        from ..exprcore.spec import eval_real
        return lambda z: eval_real(v, z)
    if callable(v):
        return v
    c = float(v)
    return lambda z: np.full(np.shape(z), c)


def _weights(where, locations, rects=None):
    if where is None:
        return np.ones(len(locations))
    if rects is not None and hasattr(where, "cell_weights"):
        return where.cell_weights(rects, locations)
    return np.asarray(where(locations), dtype=float)


def integrate_measure(v, nu, where=None):
    """``sum v(atom) mass + sum w_cell v(centre) mass`` over the filtered region.

    ``where`` is ``None`` (everything), a boolean predicate on points, or a
    :class:`RegionFilter`. Integrands with a ``log_pole`` attribute (see
    :class:`~blaschke_lab.potential.green.GreenKernel`) get the exact cell
    mean of their logarithmic part on the cell containing the pole.
    """
    f = _as_callable(v)
    total = 0.0
    if len(nu.atom_masses):
        w = _weights(where, nu.atom_locations)
        sel = (w != 0) & (nu.atom_masses != 0)
        if sel.any():
            vals = np.asarray(f(nu.atom_locations[sel]), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise EvaluationError("integrand is infinite at an atom with nonzero mass")
            total += float(np.sum(vals * nu.atom_masses[sel] * w[sel]))
    if len(nu.cell_masses):
        centers = nu.cell_centers()
        w = _weights(where, centers, nu.cell_rects)
        sel = (w != 0) & (nu.cell_masses != 0)
        if sel.any():
            c = centers[sel]
            vals = np.asarray(f(c), dtype=float)
            pole = getattr(v, "log_pole", None)
            if pole is not None:
                r = nu.cell_rects[sel]
                hit = (r[:, 0] <= pole.real) & (pole.real <= r[:, 2]) \
                    & (r[:, 1] <= pole.imag) & (pole.imag <= r[:, 3])
                if hit.any():
                    vals = vals.copy()
                    vals[hit] = v.regular_part(c[hit]) + v.log_weight * log_cell_mean(r[hit], pole)
            if not np.all(np.isfinite(vals)):
                raise EvaluationError("integrand is infinite at a cell with nonzero mass")
            total += float(np.sum(vals * nu.cell_masses[sel] * w[sel]))
    return total


# -- logarithmic potentials -------------------------------------------------------

def _log_rect_primitive(x, y):
    # F with d2F/dxdy = log sqrt(x^2 + y^2)
    r2 = x * x + y * y
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(r2 > 0, x * y * np.log(r2), 0.0)
        t2 = np.where(x != 0, x * x * np.arctan(y / np.where(x != 0, x, 1.0)), 0.0)
        t3 = np.where(y != 0, y * y * np.arctan(x / np.where(y != 0, y, 1.0)), 0.0)
    return 0.5 * (t1 - 3.0 * x * y + t2 + t3)


def log_cell_mean(rects, z):
    """Exact mean of ``log|w - z|`` over each rectangle ``[x0, y0, x1, y1]``."""
    rects = np.atleast_2d(rects)
    x0 = rects[:, 0] - z.real
    y0 = rects[:, 1] - z.imag
    x1 = rects[:, 2] - z.real
    y1 = rects[:, 3] - z.imag
    F = _log_rect_primitive
    integral = F(x1, y1) - F(x0, y1) - F(x1, y0) + F(x0, y0)
    return integral / ((x1 - x0) * (y1 - y0))


def log_potential_at(nu, z, r):
    """``integral over D(z, r) of log|w - z| d|nu|(w)``; ``-inf`` when an atom of ``|nu|`` sits at ``z``."""
    z = complex(z)
    total = 0.0
    if len(nu.atom_masses):
        d = np.abs(nu.atom_locations - z)
        sel = (d < r) & (nu.atom_masses != 0)
        if np.any(d[sel] == 0):
            return float("-inf")
        total += float(np.sum(np.abs(nu.atom_masses[sel]) * np.log(d[sel])))
    if len(nu.cell_masses):
        c = nu.cell_centers()
        rects = nu.cell_rects
        d = np.abs(c - z)
        holds = (rects[:, 0] <= z.real) & (z.real <= rects[:, 2]) \
            & (rects[:, 1] <= z.imag) & (z.imag <= rects[:, 3])
        sel = (d < r) & (nu.cell_masses != 0)
        plain = sel & ~holds
        total += float(np.sum(np.abs(nu.cell_masses[plain]) * np.log(d[plain])))
        own = sel & holds
        if own.any():
            total += float(np.sum(np.abs(nu.cell_masses[own]) * log_cell_mean(rects[own], z)))
    return total


def in_dom(nu, z, r):
    """Numeric ``dom_M`` predicate: the local log-potential of ``|nu|`` is finite."""
    return bool(np.isfinite(log_potential_at(nu, z, r)))


# -- Riesz charge of specs -------------------------------------------------------

def _holomorphic_divisor(node):
    """``(zeros, poles)`` lists of ``(point, multiplicity)`` for a holomorphic-tree node, or ``None``."""
    from ..exprcore.spec import as_polynomial_coeffs

    if isinstance(node, ast.BlaschkeNode):
        zeros = list(node.zeros)
        poles = [(1.0 / np.conj(a), m) for a, m in node.zeros if a != 0]
        return zeros, poles
    if isinstance(node, ast.Call) and node.name == "exp":
        return ([], []) if _is_holomorphic(node.arg) else None
    coeffs = as_polynomial_coeffs(node)
    if coeffs is not None:
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if len(coeffs) == 1:
            return None if coeffs[0] == 0 else ([], [])
        return [(complex(r), 1) for r in np.roots(coeffs[::-1])], []
    if isinstance(node, ast.Neg):
        return _holomorphic_divisor(node.arg)
    if isinstance(node, ast.BinOp) and node.op in "*/^":
        left = _holomorphic_divisor(node.left)
        if node.op == "^":
            n = ast.integer_exponent(node.right)
            if left is None or n is None:
                return None
            zs, ps = left
            if n < 0:
                zs, ps, n = ps, zs, -n
            return [(a, m * n) for a, m in zs], [(a, m * n) for a, m in ps]
        right = _holomorphic_divisor(node.right)
        if left is None or right is None:
            return None
        if node.op == "*":
            return left[0] + right[0], left[1] + right[1]
        return left[0] + right[1], left[1] + right[0]
    return None


def _is_holomorphic(node):
    if isinstance(node, (ast.Const, ast.Var, ast.BlaschkeNode, ast.PolyNode)):
        return True
    if isinstance(node, ast.Call):
        return node.name == "exp" and _is_holomorphic(node.arg)
    if isinstance(node, ast.Neg):
        return _is_holomorphic(node.arg)
    if isinstance(node, ast.BinOp):
        if node.op == "^":
            return _is_holomorphic(node.left) and ast.integer_exponent(node.right) is not None
        return _is_holomorphic(node.left) and _is_holomorphic(node.right)
    return False


def _charge_terms(node, scale):
    """Atoms of the Riesz charge of a real-role tree, or ``None`` when not closed-form."""
    if isinstance(node, ast.Const):
        return []
    if isinstance(node, ast.Call) and node.name == "logabs":
        div = _holomorphic_divisor(node.arg)
        if div is None:
            return None
        zeros, poles = div
        return [(a, scale * m) for a, m in zeros] + [(a, -scale * m) for a, m in poles]
    if isinstance(node, ast.Call) and node.name in ("re", "im") and _is_holomorphic(node.arg):
        div = _holomorphic_divisor(node.arg)
        return [] if div is not None and not div[1] else None
    if isinstance(node, ast.Neg):
        return _charge_terms(node.arg, -scale)
    if isinstance(node, ast.BinOp) and node.op in "+-":
        left = _charge_terms(node.left, scale)
        right = _charge_terms(node.right, scale if node.op == "+" else -scale)
        return None if left is None or right is None else left + right
    if isinstance(node, ast.BinOp) and node.op in "*/":
        for const, other in ((node.left, node.right), (node.right, node.left)):
            if node.op == "/" and const is node.left:
                continue
            if isinstance(const, ast.Const) and const.value.imag == 0 and const.value.real != 0:
                factor = const.value.real if node.op == "*" else 1.0 / const.value.real
                return _charge_terms(other, scale * factor)
    return None


def atomic_charge(spec):
    """Closed-form Riesz charge of a real-role spec built from ``logabs`` of holomorphic trees.

    Returns ``None`` when the input is not of that form (the caller then falls
    back to a grid estimate). Polynomials in a real role are harmonic (charge 0).
    """
    if isinstance(spec, Polynomial):
        return MeasureEstimate.zero()
    if not isinstance(spec, Expression):
        return None
    terms = _charge_terms(spec.root, 1.0)
    if terms is None:
        return None
    merged = {}
    for a, m in terms:
        merged[complex(a)] = merged.get(complex(a), 0.0) + m
    locs = [a for a, m in merged.items() if m != 0]
    masses = [merged[a] for a in locs]
    signed = any(m < 0 for m in masses)
    return MeasureEstimate.from_atoms(locs, masses, signed=signed)


def _restrict_atoms(nu, domain):
    """Drop atoms outside ``domain`` (e.g. the reflected poles of Blaschke factors)."""
    dom = domain.without_inner() if isinstance(domain, DomainSpec) else domain
    if dom is None or (isinstance(dom, DomainSpec) and dom.kind == "plane") or not len(nu.atom_masses):
        return nu
    keep = np.asarray(dom.contains(nu.atom_locations), dtype=bool)
    return MeasureEstimate(nu.atom_locations[keep], nu.atom_masses[keep], signed=nu.signed, flags=nu.flags)


def riesz_charge(spec, domain, h=1.0 / 256, method="auto", margin=None):
    """Riesz charge of a real-role spec over a bounded ``domain``.

    ``method`` is ``"atomic"`` (closed form, see :func:`atomic_charge`),
    ``"grid"`` (five-point Laplacian on a grid covering the domain) or
    ``"auto"`` (atomic when available, grid otherwise). Callable inputs and
    GridFields always go through the grid path.
    """
    if method in ("auto", "atomic") and not isinstance(spec, (np.ndarray,)):
        nu = atomic_charge(spec) if hasattr(spec, "node") else None
        if nu is not None:
            return _restrict_atoms(nu, domain)
        if method == "atomic":
            raise PreconditionError("spec has no closed-form Riesz charge")
    if hasattr(spec, "values") and hasattr(spec, "mask"):
        return riesz_measure_grid(spec)
    dom = domain.without_inner() if isinstance(domain, DomainSpec) else domain
    x0, y0, x1, y1 = dom.bbox()
    pad = 2 * h if margin is None else margin
    grid = sample_grid(spec, complex(x0 - pad, y0 - pad), complex(x1 + pad, y1 + pad), h,
                       real=True, region=dom.contains)
    return riesz_measure_grid(grid)
