"""Circle and disk averages with analytic removal of logarithmic singularities."""

from __future__ import annotations

import numpy as np

from ..errors import EvaluationError, PreconditionError
from ..exprcore.grid import GridField
from ..exprcore.spec import FunctionSpec, eval_real
from .measures import atomic_charge, log_potential_at

RADIAL_NODES = 48
ANGULAR_NODES = 128


def real_function(M):
    """Adapt a FunctionSpec, GridField, callable or number to ``z -> float array``.

    The second return value is the declared domain (or ``None``).
    """
    if isinstance(M, FunctionSpec):
        return (lambda z: eval_real(M, z)), M.declared_domain()
    if isinstance(M, GridField):
        return M.interpolate, None
    if callable(M):
        return M, getattr(M, "domain", None)
    c = float(M)
    return (lambda z: np.full(np.shape(z), c)), None


def log_singularities(M):
    """Point masses ``[(p, m)]`` such that ``M - sum m log|. - p|`` is smooth."""
    if isinstance(M, FunctionSpec):
        nu = atomic_charge(M)
        if nu is not None:
            return list(zip(nu.atom_locations, nu.atom_masses))
    return []


def _circle_log_mean(p, z, r):
    return np.log(max(r, abs(p - z)))


def _disk_log_mean(p, z, r):
    d = abs(p - z)
    if d >= r:
        return np.log(d)
    return np.log(r) - (r * r - d * d) / (2.0 * r * r)


def _check_inside(dom, pts, what):
    if dom is not None and dom.kind != "plane" and not np.all(dom.contains(pts)):
        raise PreconditionError(f"{what} exits the function's domain")


def circular_mean(M, z, r, nodes=256, zeros=None):
    """``(1/2pi) * integral of M(z + r e^{it}) dt`` by the periodic trapezoidal rule.

    ``zeros`` lists registered logarithmic singularities ``(point, weight)``
    (default: read off ``M`` when it is a ``logabs`` expression). Their
    contributions are integrated exactly (``log max(r, |p - z|)``) and only the
    smooth remainder goes through quadrature.
    """
    z = complex(z)
    if not r > 0:
        raise PreconditionError("radius must be positive")
    f, dom = real_function(M)
    sing = log_singularities(M) if zeros is None else [(complex(p), float(m)) for p, m in zeros]
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    for shift in (0.0, 0.5, 0.25):
        pts = z + r * np.exp(1j * (theta + shift * 2.0 * np.pi / nodes))
        _check_inside(dom, pts, "circle")
        if not any(np.any(pts == p) for p, _ in sing):
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.asarray(f(pts), dtype=float)
        if np.all(np.isneginf(vals)):
            raise EvaluationError("all circle samples are -inf")
        for p, m in sing:
            vals = vals - m * np.log(np.abs(pts - p))
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("circle passes through an unregistered singularity")
    smooth = float(np.mean(vals))
    return smooth + sum(m * _circle_log_mean(p, z, r) for p, m in sing)


def disk_mean(M, z, r, radial=RADIAL_NODES, angular=ANGULAR_NODES, zeros=None):
    """Area average over ``D(z, r)``.

    Tensor rule: Gauss-Legendre in ``s`` with radius ``rho = r s^2`` (which
    smooths the ``rho d rho`` weight at the centre) times the trapezoidal
    rule in angle. Registered logarithmic singularities are handled exactly.
    """
    z = complex(z)
    if not r > 0:
        raise PreconditionError("radius must be positive")
    f, dom = real_function(M)
    sing = log_singularities(M) if zeros is None else [(complex(p), float(m)) for p, m in zeros]
    s, ws = np.polynomial.legendre.leggauss(radial)
    s = 0.5 * (s + 1.0)
    ws = 0.5 * ws
    theta = 2.0 * np.pi * (np.arange(angular) + 0.5) / angular
    rho = r * s * s
    pts = z + rho[:, None] * np.exp(1j * theta[None, :])
    _check_inside(dom, z + r * np.exp(1j * theta), "disk")
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.asarray(f(pts), dtype=float)
        for p, m in sing:
            vals = vals - m * np.log(np.abs(pts - p))
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("disk contains an unregistered singularity on a quadrature node")
    weights = 4.0 * s ** 3 * ws  # d(rho^2 / r^2) = 4 s^3 ds
    smooth = float(np.sum(weights[:, None] * vals) / angular)
    return smooth + sum(m * _disk_log_mean(p, z, r) for p, m in sing)


def recover_value(M, z, nu=None, r0=None, levels=4):
    """Value ``M(z)`` as the limit of disk means, with the ``+inf`` convention off ``dom_M``.

    When a Riesz charge ``nu`` is supplied and its local log-potential at
    ``z`` is ``-inf`` (an atom sits at ``z``), ``+inf`` is returned. Otherwise
    disk means on radii ``r0 / 2^k`` are Richardson-extrapolated in ``r^2``.
    """
    z = complex(z)
    f, dom = real_function(M)
    if r0 is None:
        r0 = 0.05
        if dom is not None and dom.kind != "plane":
            r0 = min(r0, 0.5 * float(dom.distance_to_boundary(z)))
    if nu is not None and not np.isfinite(log_potential_at(nu, z, r0)):
        return float("inf")
    means = [disk_mean(M, z, r0 / 2 ** k) for k in range(levels)]
    return (4.0 * means[-1] - means[-2]) / 3.0
