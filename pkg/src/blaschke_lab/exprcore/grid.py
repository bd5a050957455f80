"""Uniform node grids carrying sampled function values."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import EvaluationError, PreconditionError

THREADS_ENV = "BLASCHKE_LAB_THREADS"


def thread_cap():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def node_counts(lower_left, upper_right, h):
    if not h > 0:
        raise PreconditionError("grid spacing h must be positive")
    wx = upper_right.real - lower_left.real
    wy = upper_right.imag - lower_left.imag
    if not (wx > 0 and wy > 0):
        raise PreconditionError("degenerate rectangle")
    nx = int(math.floor(wx / h + 1e-9)) + 1
    ny = int(math.floor(wy / h + 1e-9)) + 1
    return nx, ny


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples on the nodes ``lower_left + h*(ix + 1j*iy)``, stored row-major as ``values[iy, ix]``.

    ``mask`` flags nodes inside the region of interest; masked-out nodes carry
    no value contract (they hold NaN).
    """

    lower_left: complex
    upper_right: complex
    h: float
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        nx, ny = node_counts(self.lower_left, self.upper_right, self.h)
        if self.values.shape != (ny, nx) or self.mask.shape != (ny, nx):
            raise ValueError(f"grid arrays must have shape {(ny, nx)}, got {self.values.shape}")

    @property
    def shape(self):
        return self.values.shape

    def xs(self):
        return self.lower_left.real + self.h * np.arange(self.shape[1])

    def ys(self):
        return self.lower_left.imag + self.h * np.arange(self.shape[0])

    def nodes(self):
        X, Y = np.meshgrid(self.xs(), self.ys())
        return X + 1j * Y

    def node_count(self):
        return self.values.size

    def __call__(self, z):
        return self.interpolate(z)

    def interpolate(self, z):
        """Bilinear interpolation; raises when a point leaves the grid or touches a masked node."""
        z = np.asarray(z, dtype=complex)
        fx = (z.real - self.lower_left.real) / self.h
        fy = (z.imag - self.lower_left.imag) / self.h
        ny, nx = self.shape
        if np.any((fx < -1e-9) | (fy < -1e-9) | (fx > nx - 1 + 1e-9) | (fy > ny - 1 + 1e-9)):
            raise EvaluationError("point outside the grid rectangle")
        ix = np.clip(np.floor(fx).astype(int), 0, nx - 2)
        iy = np.clip(np.floor(fy).astype(int), 0, ny - 2)
        tx = fx - ix
        ty = fy - iy
        v = self.values
        corners = (v[iy, ix], v[iy, ix + 1], v[iy + 1, ix], v[iy + 1, ix + 1])
        ok = self.mask[iy, ix] & self.mask[iy, ix + 1] & self.mask[iy + 1, ix] & self.mask[iy + 1, ix + 1]
        if not np.all(ok):
            raise EvaluationError("interpolation touches a masked node")
        with np.errstate(invalid="ignore"):
            out = ((1 - tx) * (1 - ty) * corners[0] + tx * (1 - ty) * corners[1]
                   + (1 - tx) * ty * corners[2] + tx * ty * corners[3])
        return float(out) if out.ndim == 0 else out

    def metadata(self):
        return {
            "rect": [self.lower_left.real, self.lower_left.imag,
                     self.upper_right.real, self.upper_right.imag],
            "h": self.h,
            "mask_count": int(self.mask.sum()),
        }

    def to_csv(self, path, sidecar=True):
        """Write ``re,im,value`` rows in row-major node order plus a JSON sidecar."""
        path = Path(path)
        write_grid_csv(self, path)
        if sidecar:
            meta_path = path.with_suffix(path.suffix + ".json")
            meta_path.write_text(json.dumps(self.metadata(), sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text(encoding="utf-8"))
        x0, y0, x1, y1 = meta["rect"]
        ll, ur, h = complex(x0, y0), complex(x1, y1), float(meta["h"])
        nx, ny = node_counts(ll, ur, h)
        vals = np.empty(nx * ny)
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["re", "im", "value"]:
                raise ValueError("grid CSV header must be re,im,value")
            for k, row in enumerate(reader):
                vals[k] = float(row[2])
        vals = vals.reshape(ny, nx)
        mask = ~np.isnan(vals)
        return cls(ll, ur, h, vals, mask)


def fmt15(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.15g}"


def write_grid_csv(field, path):
    nodes = field.nodes().ravel()
    vals = np.where(field.mask, field.values, np.nan).ravel()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("re,im,value\n")
        for p, v in zip(nodes, vals):
            fh.write(f"{fmt15(p.real)},{fmt15(p.imag)},{fmt15(v)}\n")


def sample_grid(spec, lower_left, upper_right, h, *, real=False, region=None, threads=None):
    """Sample a FunctionSpec (or any vectorized callable) on a uniform grid.

    By default the log-modulus ``log|f|`` is sampled (``-inf`` at exact
    zeros); with ``real=True`` the real part of the value is sampled instead.
    ``region`` is an optional predicate on complex arrays marking the region of
    interest. Nodes outside the declared domain or with NaN/pole values are
    masked out. Rows are evaluated in chunks, optionally on a thread pool
    capped by ``BLASCHKE_LAB_THREADS``; the output does not depend on it.
    """
    lower_left, upper_right = complex(lower_left), complex(upper_right)
    nx, ny = node_counts(lower_left, upper_right, h)
    xs = lower_left.real + h * np.arange(nx)
    ys = lower_left.imag + h * np.arange(ny)
    upper_right = complex(xs[-1], ys[-1])
    dom = getattr(spec, "declared_domain", lambda: None)()
    evaluate = spec.evaluate if hasattr(spec, "evaluate") else spec

    def rows(iy0, iy1):
        Z = xs[None, :] + 1j * ys[iy0:iy1, None]
        with np.errstate(all="ignore"):
            w = np.asarray(evaluate(Z))
            if real:
                vals = np.real(w).astype(float)
                ok = ~np.isnan(vals)
            else:
                vals = np.log(np.abs(w))
                ok = np.isfinite(w) | (np.abs(w) == 0)
                ok &= ~np.isnan(vals)
        if dom is not None and dom.kind != "plane":
            ok &= dom.contains(Z)
        if region is not None:
            ok &= np.asarray(region(Z), dtype=bool)
        return np.where(ok, vals, np.nan), ok

    chunk = max(1, int(math.ceil(ny / (4 * thread_cap()))))
    bounds = [(i, min(i + chunk, ny)) for i in range(0, ny, chunk)]
    workers = threads or thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: rows(*b), bounds))
    else:
        parts = [rows(*b) for b in bounds]
    values = np.vstack([p[0] for p in parts])
    mask = np.vstack([p[1] for p in parts])
    return GridField(lower_left, upper_right, h, values, mask)


def find_wells(field):
    """Interior nodes that are strict minima of their 8 neighbours (zero wells of ``log|f|``)."""
    v = np.where(field.mask, field.values, np.inf)
    core = v[1:-1, 1:-1]
    is_min = np.isfinite(core) | np.isneginf(core)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            nb = v[1 + dy:v.shape[0] - 1 + dy, 1 + dx:v.shape[1] - 1 + dx]
            is_min &= (core < nb) | (np.isneginf(core) & ~np.isneginf(nb))
    iy, ix = np.nonzero(is_min)
    return field.nodes()[iy + 1, ix + 1]
