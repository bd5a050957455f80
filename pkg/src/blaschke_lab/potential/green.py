"""Extended Green's functions of disks and their Möbius images."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError, PreconditionError


def green_unit_disk(z, z0):
    """Green's function of the unit disk with pole ``z0``, extended by 0 for ``|z| >= 1``.

    Uses ``g = 1/2 log(1 + (1-|z|^2)(1-|z0|^2) / |z-z0|^2)``, which equals
    ``log|1 - conj(z0) z| - log|z - z0|`` but stays accurate next to the
    boundary and is symmetric in its arguments by construction.
    """
    z0 = complex(z0)
    if not abs(z0) < 1:
        raise PreconditionError("pole must lie strictly inside the unit disk")
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    if np.any(z == z0):
        raise PreconditionError("evaluation at the pole")
    out = _green_disk_coords(z, z0)
    return float(out) if scalar else out


def _green_disk_coords(w, w0):
    aw = np.abs(w)
    gap = (1.0 - aw) * (1.0 + aw) * (1.0 - abs(w0)) * (1.0 + abs(w0))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = 0.5 * np.log1p(gap / np.abs(w - w0) ** 2)
    return np.where(aw < 1.0, np.where(np.isnan(g), 0.0, g), 0.0)


def green_domain(domain, z, z0):
    """Extended Green's function of ``domain`` via its disk chart (conformal invariance)."""
    if domain.kind == "plane":
        raise DomainError("the whole plane has no Green's function")
    w0 = complex(domain.to_disk(z0))
    if not abs(w0) < 1:
        raise PreconditionError("pole must lie inside the domain")
    if domain.kind == "unitdisk":
        return green_unit_disk(z, z0)
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    if np.any(z == complex(z0)):
        raise PreconditionError("evaluation at the pole")
    w = domain.to_disk(z)
    w = np.where(np.isfinite(w), w, 2.0)
    out = _green_disk_coords(w, w0)
    return float(out) if scalar else out


class GreenKernel:
    """``z -> g_D(z, z0)`` as an integrand that knows its logarithmic pole.

    ``integrate_measure`` uses :meth:`regular_part` together with the exact
    cell mean of ``-log|z - z0|`` on the cell holding the pole.
    """

    def __init__(self, domain, z0):
        self.domain = domain
        self.log_pole = complex(z0)
        self.log_weight = -1.0
        w0 = complex(domain.to_disk(z0))
        if not abs(w0) < 1:
            raise PreconditionError("pole must lie inside the domain")
        self._w0 = w0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            w = self.domain.to_disk(z)
            w = np.where(np.isfinite(w), w, 2.0)
            out = _green_disk_coords(w, self._w0)
        return np.where(z == self.log_pole, np.inf, out)

    def regular_part(self, z):
        """``g(z, z0) + log|z - z0|`` inside D, a harmonic function near the pole."""
        z = np.asarray(z, dtype=complex)
        at_pole = z == self.log_pole
        safe = np.where(at_pole, self.log_pole + 1.0, z)
        ws = self.domain.to_disk(safe)
        with np.errstate(divide="ignore"):
            val = np.log(np.abs(1 - np.conj(self._w0) * ws)) - np.log(np.abs(ws - self._w0)) \
                + np.log(np.abs(safe - self.log_pole))
        limit = np.log(1 - abs(self._w0) ** 2) - np.log(np.abs(self.domain.to_disk_derivative(self.log_pole)))
        return np.where(at_pole, limit, val)


def green_field(domain, z0, lower_left, upper_right, h):
    """Sample ``g_D(., z0)`` on a grid; the pole node (if any) holds ``+inf``."""
    from ..exprcore.grid import sample_grid

    kernel = GreenKernel(domain, z0)
    return sample_grid(kernel, lower_left, upper_right, h, real=True)
