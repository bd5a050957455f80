"""Argument-principle zero counting and quadtree zero localization."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .domains import DomainSpec
from .errors import (
    ContourConvergenceError,
    EvaluationError,
    PreconditionError,
    SubdivisionBudgetError,
    ZeroOnContourError,
)
from .potential.measures import MeasureEstimate

REFINE_TOL = 1e-10
CONTOUR_TOL = 1e-12
H_MIN = 1e-6
MAX_NODES = 2 ** 16
LOG_BEND_MAX = 0.5
MAX_BOXES = 200_000
JITTER = [(0.0, 0.0), (1.0, 0.618), (-0.618, 1.0), (0.382, -1.0), (-1.0, -0.382), (0.5, 0.854)]


@dataclass(frozen=True)
class Contour:
    """Closed positively oriented contour: a circle or an axis-aligned rectangle."""

    kind: str
    center: complex = 0j
    radius: float = 1.0
    lower_left: complex = 0j
    upper_right: complex = 0j
    node_count: int = 64

    def __post_init__(self):
        if self.node_count < 64:
            raise PreconditionError("contours need at least 64 nodes")
        if self.kind not in ("circle", "rectangle"):
            raise PreconditionError(f"unknown contour kind {self.kind!r}")

    @classmethod
    def circle(cls, center, radius, node_count=64):
        return cls("circle", center=complex(center), radius=float(radius), node_count=node_count)

    @classmethod
    def rectangle(cls, lower_left, upper_right, node_count=64):
        return cls("rectangle", lower_left=complex(lower_left), upper_right=complex(upper_right),
                   node_count=node_count)

    def nodes(self, n=None):
        n = n or self.node_count
        if self.kind == "circle":
            return self.center + self.radius * np.exp(2j * np.pi * np.arange(n) / n)
        ll, ur = self.lower_left, self.upper_right
        corners = [ll, complex(ur.real, ll.imag), ur, complex(ll.real, ur.imag)]
        t = 4.0 * np.arange(n) / n
        k = np.floor(t).astype(int)
        frac = t - k
        start = np.array(corners)[k]
        end = np.array(corners)[(k + 1) % 4]
        return start + frac * (end - start)


def _values(f, pts):
    with np.errstate(all="ignore"):
        return np.asarray(f.evaluate(pts), dtype=complex)


def winding_number(f, contour, tol=CONTOUR_TOL, max_nodes=MAX_NODES):
    """Zero count of ``f`` inside ``contour`` (argument increment / 2pi).

    The node count is doubled until every consecutive argument increment is
    below pi/2 on two successive levels, each coarse increment agrees with the
    sum of its two halves, and ``log|f|`` has small second differences along
    the contour. The last condition keeps the node spacing below the distance
    to the nearest zero, where increments aliased by whole turns are invisible
    to the other two.
    """
    dom = f.declared_domain() if hasattr(f, "declared_domain") else None
    n = contour.node_count
    coarse = None
    while True:
        pts = contour.nodes(n)
        if dom is not None and dom.kind != "plane" and not np.all(dom.contains(pts)):
            raise PreconditionError("contour leaves the function's declared domain")
        vals = _values(f, pts)
        if not np.all(np.isfinite(vals)):
            raise EvaluationError("non-finite function value on the contour")
        if np.min(np.abs(vals)) <= tol:
            raise ZeroOnContourError("function vanishes (|f| <= tol) on the contour")
        steps = np.angle(np.roll(vals, -1) / vals)
        if coarse is not None:
            halves = steps[0::2] + steps[1::2]
            logs = np.log(np.abs(vals))
            bend = np.max(np.abs(logs - 0.5 * (np.roll(logs, 1) + np.roll(logs, -1))))
            if (max(np.max(np.abs(coarse)), np.max(np.abs(steps))) < np.pi / 2
                    and bend < LOG_BEND_MAX
                    and np.allclose(halves, coarse, rtol=0, atol=1e-6)):
                return int(round(float(np.sum(steps)) / (2 * np.pi)))
        coarse = steps
        n *= 2
        if n > max_nodes:
            raise ContourConvergenceError("argument continuation did not converge")


@dataclass(frozen=True)
class Box:
    """Axis-aligned region ``[x0, x1] x [y0, y1]``, usable as a locate_zeros region."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def side(self):
        return max(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def center(self):
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    @property
    def diagonal(self):
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    def contour(self):
        return Contour.rectangle(complex(self.x0, self.y0), complex(self.x1, self.y1))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return (z.real > self.x0) & (z.real < self.x1) & (z.imag > self.y0) & (z.imag < self.y1)

    def contains_box(self, x0, y0, x1, y1):
        return x0 >= self.x0 and x1 <= self.x1 and y0 >= self.y0 and y1 <= self.y1

    def intersects_box(self, x0, y0, x1, y1):
        return not (x1 <= self.x0 or x0 >= self.x1 or y1 <= self.y0 or y0 >= self.y1)

    def distance_to_boundary(self, z):
        z = np.asarray(z, dtype=complex)
        return np.minimum.reduce([z.real - self.x0, self.x1 - z.real, z.imag - self.y0, self.y1 - z.imag])

    def bbox(self):
        return (self.x0, self.y0, self.x1, self.y1)

    def describe(self):
        return f"box:{self.x0!r},{self.y0!r},{self.x1!r},{self.y1!r}"


@dataclass(frozen=True)
class ZeroEntry:
    location: complex
    multiplicity: int
    refinement_error: float


@dataclass(frozen=True)
class ZeroSequence:
    """Located zeros, sorted by decreasing distance to the region boundary."""

    entries: tuple
    region: Optional[object] = field(default=None, compare=False)
    truncated: bool = False

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def locations(self):
        return np.array([e.location for e in self.entries], dtype=complex)

    def multiplicities(self):
        return np.array([e.multiplicity for e in self.entries], dtype=int)

    def total_multiplicity(self):
        return int(sum(e.multiplicity for e in self.entries))

    def to_list(self):
        return [{"re": float(e.location.real), "im": float(e.location.imag),
                 "mult": int(e.multiplicity), "err": float(e.refinement_error)} for e in self.entries]

    def to_json(self):
        return json.dumps(self.to_list(), sort_keys=True)

    @classmethod
    def from_points(cls, points, multiplicities=None, region=None, truncated=False):
        points = [complex(p) for p in points]
        mults = multiplicities or [1] * len(points)
        entries = [ZeroEntry(p, int(m), 0.0) for p, m in zip(points, mults)]
        return cls(canonical_order(entries, region), region, truncated)

    @classmethod
    def from_list(cls, data, region=None, truncated=False):
        entries = [ZeroEntry(complex(d["re"], d["im"]), int(d.get("mult", 1)), float(d.get("err", 0.0)))
                   for d in data]
        for e in entries:
            if e.multiplicity < 1:
                raise ValueError("zero multiplicity must be a positive integer")
        return cls(canonical_order(entries, region), region, truncated)

    @classmethod
    def load(cls, path, region=None, truncated=False):
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if isinstance(data, dict):
            truncated = bool(data.get("truncated", truncated))
            data = data["zeros"]
        return cls.from_list(data, region, truncated)


def canonical_order(entries, region):
    entries = list(entries)
    if not entries:
        return ()
    locs = np.array([e.location for e in entries], dtype=complex)
    if region is not None and not (isinstance(region, DomainSpec) and region.kind == "plane"):
        dist = np.asarray(region.distance_to_boundary(locs), dtype=float)
    else:
        dist = -np.abs(locs)
    keys = sorted(range(len(entries)), key=lambda k: (-dist[k], locs[k].real, locs[k].imag))
    return tuple(entries[k] for k in keys)


def zero_counting_measure(Z):
    """Atom of mass ``multiplicity`` at every zero."""
    return MeasureEstimate.from_atoms(Z.locations(), Z.multiplicities().astype(float))


# -- localization -----------------------------------------------------------------

def _fd_derivative(f, z):
    step = 1e-7 * (1.0 + abs(z))
    vals = _values(f, np.array([z + step, z - step]))
    return (vals[0] - vals[1]) / (2 * step)


def _newton(f, z, box, mult=1, tol=REFINE_TOL, max_iter=80):
    """Damped Newton (``z - m f/f'``) from ``z``; ``(root, error)`` or ``None``."""
    fz = complex(_values(f, np.array([z]))[0])
    pad = 1e-12 + tol
    for _ in range(max_iter):
        if fz == 0:
            return z, 0.0
        d = _fd_derivative(f, z)
        if d == 0 or not np.isfinite(d):
            return None
        step = mult * fz / d
        lam = 1.0
        for _ in range(30):
            cand = z - lam * step
            fc = complex(_values(f, np.array([cand]))[0])
            if np.isfinite(fc) and abs(fc) < abs(fz):
                break
            lam *= 0.5
        else:
            if abs(step) <= tol:
                return z, abs(step)
            return None
        z, fz = cand, fc
        if not (box.x0 - pad <= z.real <= box.x1 + pad and box.y0 - pad <= z.imag <= box.y1 + pad):
            return None
        if abs(lam * step) <= tol:
            d = _fd_derivative(f, z)
            err = abs(mult * fz / d) if d != 0 else abs(lam * step)
            return z, max(err, 0.0)
    return None


def _root_box(region, f):
    if isinstance(region, Box):
        x0, y0, x1, y1 = region.bbox()
    else:
        x0, y0, x1, y1 = region.bbox()
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    half = 0.5 * max(x1 - x0, y1 - y0)
    # asymmetric enlargement keeps symmetric zero sets off the split lines
    lx = cx - half * 1.0731
    ly = cy - half * 1.0419
    side = 2 * half * 1.1
    return Box(lx, ly, lx + side, ly + side)


def _children(box, offset):
    side = box.side
    mx = box.center.real + offset[0] * side / 7.0
    my = box.center.imag + offset[1] * side / 7.0
    return [Box(box.x0, box.y0, mx, my), Box(mx, box.y0, box.x1, my),
            Box(box.x0, my, mx, box.y1), Box(mx, my, box.x1, box.y1)]


def _box_winding(f, box, tol, dom):
    if dom is not None and dom.kind != "plane" and not dom.contains_box(box.x0, box.y0, box.x1, box.y1):
        return None
    return winding_number(f, box.contour(), tol)


def _split(f, box, tol, dom, parent_w):
    last = None
    for offset in JITTER:
        kids = _children(box, offset)
        try:
            ws = [_box_winding(f, k, tol, dom) for k in kids]
        except (ZeroOnContourError, ContourConvergenceError) as exc:
            last = exc
            continue
        if parent_w is not None and all(w is not None for w in ws) and sum(ws) != parent_w:
            last = ContourConvergenceError("child winding numbers do not add up")
            continue
        return list(zip(kids, ws))
    raise ZeroOnContourError(f"zero on contour after jitter attempts ({last})", box=box.bbox())


def _cluster(f, box, w, refine_tol, max_iter=60):
    """Entry for ``w`` zeros that cannot be separated inside ``box``.

    Modified Newton (step ``w f/f'``) runs from the centre; the iterate with
    the smallest ``|f|`` is kept, its error being the last Newton correction.
    Falls back to the centre with the box diagonal as error.
    """
    res = _newton(f, box.center, box, w, refine_tol)
    if res is not None and res[1] <= refine_tol:
        return ZeroEntry(res[0], w, res[1])
    z = box.center
    fz = complex(_values(f, np.array([z]))[0])
    best = (abs(fz), z, box.diagonal)
    for _ in range(max_iter):
        d = _fd_derivative(f, z)
        if fz == 0 or d == 0 or not np.isfinite(d):
            break
        step = w * fz / d
        z = z - step
        if not box.contains(z):
            break
        fz = complex(_values(f, np.array([z]))[0])
        if abs(fz) < best[0]:
            best = (abs(fz), z, abs(step))
    return ZeroEntry(best[1], w, min(best[2], box.diagonal))


def _merge_clusters(entries, radius):
    """Collapse entries closer than ``radius`` (a rounding-split multiple zero) into one."""
    groups = []
    for e in sorted(entries, key=lambda e: (e.location.real, e.location.imag)):
        for g in groups:
            if any(abs(e.location - o.location) < radius for o in g):
                g.append(e)
                break
        else:
            groups.append([e])
    out = []
    for g in groups:
        if len(g) == 1:
            out.append(g[0])
            continue
        m = sum(e.multiplicity for e in g)
        loc = sum(e.location * e.multiplicity for e in g) / m
        err = max(e.refinement_error + abs(e.location - loc) for e in g)
        out.append(ZeroEntry(loc, m, err))
    return out


def locate_zeros(f, region, h_min=H_MIN, refine_tol=REFINE_TOL, contour_tol=CONTOUR_TOL,
                 max_boxes=MAX_BOXES):
    """Find all zeros of ``f`` inside ``region`` (a DomainSpec or :class:`Box`).

    Quadtree subdivision on argument-principle counts: boxes with count 0 are
    discarded, count 1 is refined with damped Newton (finite-difference
    derivative), larger counts are split until separated or smaller than
    ``h_min``. Boxes that poke out of ``f``'s declared domain are split
    without being counted.
    """
    if not h_min > 0:
        raise PreconditionError("h_min must be positive")
    if isinstance(region, DomainSpec):
        region = region.without_inner()
        if not region.is_bounded():
            raise PreconditionError("locate_zeros needs a bounded region")
    dom = f.declared_domain() if hasattr(f, "declared_domain") else None
    found = []
    root = _root_box(region, f)
    queue = deque()
    root_w = None
    for offset in JITTER:
        shifted = Box(root.x0 + offset[0] * root.side / 70, root.y0 + offset[1] * root.side / 70,
                      root.x1 + offset[0] * root.side / 70, root.y1 + offset[1] * root.side / 70)
        try:
            root_w = _box_winding(f, shifted, contour_tol, dom)
            root = shifted
            break
        except (ZeroOnContourError, ContourConvergenceError):
            continue
    else:
        raise ZeroOnContourError("zero on the root contour after jitter attempts", box=root.bbox())
    queue.append((root, root_w))
    processed = 0
    while queue:
        box, w = queue.popleft()
        processed += 1
        if processed > max_boxes:
            raise SubdivisionBudgetError(f"more than {max_boxes} boxes processed")
        if not region.intersects_box(box.x0, box.y0, box.x1, box.y1):
            continue
        if w is None:
            if box.side < h_min:
                raise PreconditionError("region reaches outside the function's declared domain")
            queue.extend(_split(f, box, contour_tol, dom, None))
            continue
        if w < 0:
            raise EvaluationError("negative winding number: pole inside the region")
        if w == 0:
            continue
        if w == 1:
            res = _newton(f, box.center, box, 1, refine_tol)
            if res is not None and res[1] <= refine_tol:
                found.append(ZeroEntry(res[0], 1, res[1]))
                continue
            if box.side < max(refine_tol, 1e-13):
                found.append(ZeroEntry(box.center, 1, 0.5 * box.diagonal))
                continue
        elif box.side < h_min:
            found.append(_cluster(f, box, w, refine_tol))
            continue
        try:
            queue.extend(_split(f, box, contour_tol, dom, w))
        except ZeroOnContourError:
            if w == 1 and box.side >= h_min:
                raise
            # |f| <= tol within reach of every split line: multiplicity resolution limit
            found.append(_cluster(f, box, w, refine_tol))
    found = _merge_clusters(found, h_min)
    inside = [e for e in found if bool(region.contains(e.location))]
    return ZeroSequence(canonical_order(inside, region), region)


def zeros_of(f, region, **kwargs):
    """Zeros of ``f`` in ``region``; Blaschke products report their constructor zeros exactly."""
    from .exprcore.spec import BlaschkeProduct

    if isinstance(f, BlaschkeProduct):
        reg = region.without_inner() if isinstance(region, DomainSpec) else region
        entries = [ZeroEntry(a, m, 0.0) for a, m in f.zeros if bool(reg.contains(a))]
        return ZeroSequence(canonical_order(entries, reg), reg)
    return locate_zeros(f, region, **kwargs)
