"""Sub-domains of the extended plane that are Möbius images of the unit disk.

Every supported domain ``D`` comes with a chart ``T(w) = (a w + b) / (c w + d)``
mapping the unit disk onto ``D``. The image is a disk, an open half-plane, or
the exterior of a closed disk (containing infinity); :meth:`DomainSpec.geometry`
returns that shape explicitly so distances, containment and cell/area
fractions can be computed in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError

BOUNDARY_SAMPLES = 512


@dataclass(frozen=True)
class Circle:
    """Boundary circle; ``inside`` tells whether the domain is the bounded side."""

    center: complex
    radius: float
    inside: bool = True

    def signed_distance(self, z):
        d = np.abs(np.asarray(z, dtype=complex) - self.center)
        return self.radius - d if self.inside else d - self.radius

    def parallel_curve(self, t, n):
        rho = self.radius - t if self.inside else self.radius + t
        theta = 2.0 * np.pi * np.arange(n) / n
        return self.center + max(rho, 0.0) * np.exp(1j * theta)

    def inward_normal(self, p):
        u = (np.asarray(p, dtype=complex) - self.center)
        u = u / np.abs(u)
        return -u if self.inside else u

    def bbox(self):
        c, r = self.center, self.radius
        return (c.real - r, c.imag - r, c.real + r, c.imag + r)


@dataclass(frozen=True)
class HalfPlane:
    """``{z : Re((z - point) * conj(normal)) > 0}`` with unit inward ``normal``."""

    point: complex
    normal: complex
    extent: float = 50.0

    def signed_distance(self, z):
        return np.real((np.asarray(z, dtype=complex) - self.point) * np.conj(self.normal))

    def parallel_curve(self, t, n):
        tangent = 1j * self.normal
        s = np.linspace(-self.extent, self.extent, n)
        return self.point + t * self.normal + s * tangent

    def inward_normal(self, p):
        return np.full(np.shape(p), self.normal, dtype=complex)


@dataclass(frozen=True)
class DomainSpec:
    """A domain ``D`` with an optional compactly contained inner domain ``D0``.

    ``kind`` is one of ``"unitdisk"``, ``"disk"``, ``"moebius"``, ``"plane"``.
    Use the module-level constructors rather than building instances directly.
    """

    kind: str
    center: complex = 0j
    radius: float = 1.0
    coeffs: Optional[tuple] = None
    inner: Optional["DomainSpec"] = None
    regular: bool = True
    _geometry: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("unitdisk", "disk", "moebius", "plane"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.kind == "disk" and not self.radius > 0:
            raise DomainError("disk radius must be positive")
        if self.kind == "moebius":
            if self.coeffs is None or len(self.coeffs) != 4:
                raise DomainError("moebius domain needs four coefficients a, b, c, d")
            a, b, c, d = (complex(x) for x in self.coeffs)
            if abs(a * d - b * c) < 1e-14:
                raise DomainError("degenerate Moebius map: ad - bc = 0")
            object.__setattr__(self, "coeffs", (a, b, c, d))
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "_geometry", self._build_geometry())
        if self.inner is not None:
            if self.inner.kind == "plane":
                raise DomainError("inner domain cannot be the whole plane")
            if not self.compactly_contains(self.inner):
                raise DomainError("inner domain D0 is not compactly contained in D")

    # -- chart -------------------------------------------------------------
    def chart(self):
        """Coefficients ``(a, b, c, d)`` of the map unit disk -> D."""
        if self.kind == "unitdisk":
            return (1 + 0j, 0j, 0j, 1 + 0j)
        if self.kind == "disk":
            return (complex(self.radius), self.center, 0j, 1 + 0j)
        if self.kind == "moebius":
            return self.coeffs
        raise DomainError("the whole plane has no disk chart")

    def to_disk(self, z):
        """Inverse chart ``phi``: D -> unit disk (``inf`` where undefined)."""
        a, b, c, d = self.chart()
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            num = d * z - b
            den = -c * z + a
            w = num / den
        return np.where(den == 0, np.complex128(complex(np.inf, 0)), w)

    def from_disk(self, w):
        a, b, c, d = self.chart()
        w = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (a * w + b) / (c * w + d)

    def to_disk_derivative(self, z):
        a, b, c, d = self.chart()
        z = np.asarray(z, dtype=complex)
        return (a * d - b * c) / (-c * z + a) ** 2

    # -- geometry ----------------------------------------------------------
    def _build_geometry(self):
        if self.kind == "plane":
            return None
        if self.kind == "unitdisk":
            return Circle(0j, 1.0, True)
        if self.kind == "disk":
            return Circle(self.center, float(self.radius), True)
        a, b, c, d = self.coeffs
        if c == 0:
            return Circle(b / d, abs(a / d), True)
        w_pole = -d / c
        if abs(abs(w_pole) - 1.0) < 1e-12:
            # unit circle passes through the pole: image is a line
            theta = np.angle(w_pole)
            p1 = complex(self.from_disk(np.exp(1j * (theta + 2.0))))
            p2 = complex(self.from_disk(np.exp(1j * (theta - 2.0))))
            tangent = (p2 - p1) / abs(p2 - p1)
            normal = 1j * tangent
            inner_pt = complex(self.from_disk(0.0))
            if np.real((inner_pt - p1) * np.conj(normal)) < 0:
                normal = -normal
            return HalfPlane(p1, normal)
        pts = [complex(self.from_disk(w)) for w in (1.0, 1j, -1.0)]
        center, radius = _circumcircle(*pts)
        inside = abs(w_pole) > 1.0
        return Circle(center, radius, inside)

    def geometry(self):
        return self._geometry

    def is_bounded(self):
        g = self._geometry
        return isinstance(g, Circle) and g.inside

    def signed_distance(self, z):
        """Distance to the boundary, positive inside D and negative outside."""
        if self._geometry is None:
            return np.full(np.shape(z), np.inf)
        return self._geometry.signed_distance(z)

    def distance_to_boundary(self, z):
        return np.abs(self.signed_distance(z))

    def contains(self, z):
        return self.signed_distance(z) > 0

    def contains_closed(self, z):
        return self.signed_distance(z) >= 0

    def boundary_points(self, n=BOUNDARY_SAMPLES):
        if self._geometry is None:
            raise DomainError("the whole plane has no finite boundary")
        return self._geometry.parallel_curve(0.0, n)

    def parallel_curve(self, t, n=BOUNDARY_SAMPLES):
        """Points at distance ``t`` inside D from its boundary."""
        if self._geometry is None:
            raise DomainError("the whole plane has no finite boundary")
        return self._geometry.parallel_curve(t, n)

    def inward_normal(self, p):
        return self._geometry.inward_normal(p)

    def bbox(self):
        """Bounding box ``(x0, y0, x1, y1)`` for bounded domains."""
        if not self.is_bounded():
            raise DomainError("unbounded domain has no bounding box")
        return self._geometry.bbox()

    def contains_box(self, x0, y0, x1, y1):
        corners = np.array([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1])
        g = self._geometry
        if g is None:
            return True
        if isinstance(g, Circle) and not g.inside:
            return _box_disk_gap(g.center, x0, y0, x1, y1) > g.radius
        return bool(np.all(g.signed_distance(corners) > 0))

    def intersects_box(self, x0, y0, x1, y1):
        g = self._geometry
        if g is None:
            return True
        corners = np.array([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1])
        if isinstance(g, Circle):
            if g.inside:
                return _box_disk_gap(g.center, x0, y0, x1, y1) < g.radius
            return bool(np.any(np.abs(corners - g.center) > g.radius))
        return bool(np.any(g.signed_distance(corners) > 0))

    def compactly_contains(self, other, n=BOUNDARY_SAMPLES):
        """Numerical check of ``other ⋐ self`` on sampled boundary points."""
        if not other.is_bounded():
            return False
        if self._geometry is None:
            return True
        pts = other.boundary_points(n)
        if not np.all(self.contains(pts)):
            return False
        return float(np.min(self.signed_distance(pts))) > 0.0

    def cell_fraction(self, rects):
        """Area fraction of each rectangle ``[x0, y0, x1, y1]`` lying inside D."""
        rects = np.atleast_2d(np.asarray(rects, dtype=float))
        g = self._geometry
        if g is None:
            return np.ones(len(rects))
        area = (rects[:, 2] - rects[:, 0]) * (rects[:, 3] - rects[:, 1])
        if isinstance(g, Circle):
            inter = disk_rect_area(g.center, g.radius, rects)
            frac = inter / area
            return np.clip(frac if g.inside else 1.0 - frac, 0.0, 1.0)
        return np.array([_halfplane_rect_area(g, r) for r in rects]) / area

    def inner_hull_radius(self):
        """Radius in chart coordinates of the smallest centered disk holding D0."""
        if self.inner is None:
            raise DomainError("domain has no inner sub-domain")
        w = self.to_disk(self.inner.boundary_points())
        return float(np.max(np.abs(w)))

    # -- construction helpers ---------------------------------------------
    def with_inner(self, inner):
        return DomainSpec(self.kind, self.center, self.radius, self.coeffs, inner, self.regular)

    def without_inner(self):
        return DomainSpec(self.kind, self.center, self.radius, self.coeffs, None, self.regular)

    def concentric(self, rho, inner=None):
        """Image under the chart of the disk ``|w| < rho``."""
        if not 0 < rho <= 1:
            raise DomainError("concentric radius must lie in (0, 1]")
        a, b, c, d = self.chart()
        return moebius_image(a * rho, b, c * rho, d, inner=inner)

    def describe(self):
        if self.kind == "unitdisk":
            text = "unitdisk"
        elif self.kind == "disk":
            text = f"disk:{_fmt_complex(self.center)},{self.radius!r}"
        elif self.kind == "moebius":
            text = "moebius:" + ",".join(_fmt_complex(c) for c in self.coeffs)
        else:
            text = "plane"
        if self.inner is not None:
            text += f" minus {self.inner.describe()}"
        return text


def unit_disk(inner=None):
    return DomainSpec("unitdisk", inner=inner)


def disk(center, radius, inner=None):
    return DomainSpec("disk", center=complex(center), radius=float(radius), inner=inner)


def moebius_image(a, b, c, d, inner=None):
    return DomainSpec("moebius", coeffs=(a, b, c, d), inner=inner)


def whole_plane(inner=None):
    return DomainSpec("plane", inner=inner)


def _fmt_complex(c):
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    sign = "+" if c.imag >= 0 else "-"
    return f"{c.real!r}{sign}{abs(c.imag)!r}i"


def _circumcircle(p1, p2, p3):
    ax, ay, bx, by, cx, cy = p1.real, p1.imag, p2.real, p2.imag, p3.real, p3.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0:
        raise DomainError("collinear boundary points")
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
          + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
          + (cx * cx + cy * cy) * (bx - ax)) / d
    center = complex(ux, uy)
    return center, abs(p1 - center)


def _box_disk_gap(center, x0, y0, x1, y1):
    dx = max(x0 - center.real, 0.0, center.real - x1)
    dy = max(y0 - center.imag, 0.0, center.imag - y1)
    return math.hypot(dx, dy)


def _chord_primitive(x, r):
    # integral of sqrt(r^2 - t^2) dt from -r to x, for x in [-r, r]
    s = np.sqrt(np.maximum(r * r - x * x, 0.0))
    return 0.5 * (x * s + r * r * np.arcsin(np.clip(x / r, -1.0, 1.0))) + 0.25 * np.pi * r * r


def _quadrant_area(x, y, r):
    """Area of the disk ``|z| < r`` intersected with ``{X < x, Y < y}`` (vectorized)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = np.clip(x, -r, r)
    yc = np.clip(y, -r, r)
    a = np.sqrt(np.maximum(r * r - yc * yc, 0.0))
    upper = yc >= 0
    S = lambda t: _chord_primitive(t, r)  # noqa: E731
    # |X| >= a: chord fully below y when y >= 0, empty otherwise
    left_end = np.minimum(xc, -a)
    part1 = np.where(upper, 2.0 * S(left_end), 0.0)
    u = np.clip(xc, -a, a)
    part2 = np.where(xc > -a, yc * (u + a) + S(u) - S(-a), 0.0)
    part3 = np.where(upper & (xc > a), 2.0 * (S(xc) - S(a)), 0.0)
    area = part1 + part2 + part3
    area = np.where(y >= r, 2.0 * S(xc), area)
    return np.where(y <= -r, 0.0, area)


def disk_rect_area(center, radius, rects):
    """Exact area of ``disk(center, radius) ∩ rect`` for each row ``[x0, y0, x1, y1]``."""
    rects = np.atleast_2d(np.asarray(rects, dtype=float))
    x0 = rects[:, 0] - center.real
    y0 = rects[:, 1] - center.imag
    x1 = rects[:, 2] - center.real
    y1 = rects[:, 3] - center.imag
    Q = lambda x, y: _quadrant_area(x, y, radius)  # noqa: E731
    return np.maximum(Q(x1, y1) - Q(x0, y1) - Q(x1, y0) + Q(x0, y0), 0.0)


def _halfplane_rect_area(hp, rect):
    x0, y0, x1, y1 = rect
    poly = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    sd = lambda p: float(np.real((p - hp.point) * np.conj(hp.normal)))  # noqa: E731
    out = []
    for i, p in enumerate(poly):
        q = poly[(i + 1) % 4]
        sp, sq = sd(p), sd(q)
        if sp >= 0:
            out.append(p)
        if (sp >= 0) != (sq >= 0):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    if len(out) < 3:
        return 0.0
    xs = np.array([p.real for p in out])
    ys = np.array([p.imag for p in out])
    return 0.5 * abs(float(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))))
