"""Evaluable function specs.

A :class:`FunctionSpec` is one of three immutable variants:

* :class:`BlaschkeProduct` with explicit zero multiplicities,
* :class:`Polynomial` with ascending coefficients,
* :class:`Expression` wrapping an arbitrary expression tree.

Holomorphic roles (``f``) use :func:`eval_value` / :func:`eval_log_modulus`;
real roles (``M``, ``u``, ``v``) use :func:`eval_real`, the real part of the
expression value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..domains import DomainSpec, disk
from ..errors import EvaluationError
from . import ast


class FunctionSpec:
    """Common interface; subclasses are frozen dataclasses."""

    domain: Optional[DomainSpec]

    def evaluate(self, z):
        """Raw vectorized evaluation; no domain checks, non-finite values pass through."""
        return self.node().evaluate(z)

    def node(self):
        raise NotImplementedError

    def text(self):
        return to_text(self.node())

    def declared_domain(self):
        return self.domain

    def __str__(self):
        return self.text()


@dataclass(frozen=True)
class BlaschkeProduct(FunctionSpec):
    zeros: tuple
    domain: Optional[DomainSpec] = field(default=None, compare=False)

    def __post_init__(self):
        merged = {}
        order = []
        for a, m in self.zeros:
            a = complex(a)
            m = int(m)
            if m < 1:
                raise ValueError("zero multiplicity must be a positive integer")
            if not abs(a) < 1:
                raise ValueError(f"Blaschke zero {a} is not inside the unit disk")
            if a not in merged:
                order.append(a)
                merged[a] = 0
            merged[a] += m
        object.__setattr__(self, "zeros", tuple((a, merged[a]) for a in order))
        if self.domain is None:
            object.__setattr__(self, "domain", blaschke_domain(self.zeros))

    def node(self):
        return ast.BlaschkeNode(self.zeros)

    def evaluate(self, z):
        return ast.blaschke_values(self.zeros, z)

    def zero_list(self):
        return [(a, m) for a, m in self.zeros]


@dataclass(frozen=True)
class Polynomial(FunctionSpec):
    coeffs: tuple
    domain: Optional[DomainSpec] = field(default=None, compare=False)

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs)
        if not coeffs or coeffs[-1] == 0:
            raise ValueError("polynomial leading coefficient must be nonzero")
        object.__setattr__(self, "coeffs", coeffs)

    def node(self):
        return ast.PolyNode(self.coeffs)

    def evaluate(self, z):
        return ast.horner(self.coeffs, z)

    def degree(self):
        return len(self.coeffs) - 1

    def roots(self):
        if self.degree() == 0:
            return np.zeros(0, dtype=complex)
        return np.roots(self.coeffs[::-1])


@dataclass(frozen=True)
class Expression(FunctionSpec):
    root: ast.Node
    domain: Optional[DomainSpec] = field(default=None, compare=False)

    def __post_init__(self):
        if self.domain is None:
            object.__setattr__(self, "domain", _expression_domain(self.root))

    def node(self):
        return self.root


def blaschke_domain(zeros):
    """Largest centered disk free of the poles ``1/conj(a)``; ``None`` if no poles."""
    moduli = [abs(a) for a, _ in zeros if a != 0]
    if not moduli:
        return None
    return disk(0, 1.0 / max(moduli))


def _expression_domain(root):
    radii = []
    stack = [root]
    while stack:
        n = stack.pop()
        if isinstance(n, ast.BlaschkeNode):
            d = blaschke_domain(n.zeros)
            if d is not None:
                radii.append(d.radius)
        stack.extend(n.children())
    return disk(0, min(radii)) if radii else None


# -- evaluation ---------------------------------------------------------------

def _check_domain(spec, z):
    dom = spec.declared_domain()
    if dom is not None and dom.kind != "plane":
        if not np.all(dom.contains(z)):
            raise EvaluationError(f"point outside declared domain {dom.describe()}")


def eval_value(spec, z):
    """Complex value of ``spec`` at ``z`` (scalar or array), with domain checks."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    _check_domain(spec, z)
    with np.errstate(all="ignore"):
        w = spec.evaluate(z)
    if not np.all(np.isfinite(w)):
        raise EvaluationError("evaluation hit a pole or produced a non-finite value")
    return complex(w) if scalar else w


def eval_log_modulus(spec, z):
    """``log|f(z)|`` with ``-inf`` exactly where ``f(z) == 0``."""
    w = eval_value(spec, z)
    with np.errstate(divide="ignore"):
        out = np.log(np.abs(w))
    return float(out) if np.ndim(out) == 0 else out


def eval_real(spec, z):
    """Real-role evaluation: real part of the value; ``-inf`` from ``logabs`` kept."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    _check_domain(spec, z)
    with np.errstate(all="ignore"):
        w = spec.evaluate(z)
    re = w.real
    if np.any(np.isnan(re)):
        raise EvaluationError("evaluation produced NaN (pole or indeterminate form)")
    return float(re) if scalar else re


# -- printing -----------------------------------------------------------------

def fmt_number(c):
    """Round-trippable text for a complex constant."""
    c = complex(c)
    if c.imag == 0:
        return repr(c.real) if c.real >= 0 else f"({c.real!r})"
    if c.real == 0:
        return f"({c.imag!r}i)"
    sign = "+" if c.imag >= 0 else "-"
    return f"({c.real!r}{sign}{abs(c.imag)!r}i)"


def to_text(node):
    if isinstance(node, ast.Const):
        return fmt_number(node.value)
    if isinstance(node, ast.Var):
        return "z"
    if isinstance(node, ast.Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, ast.BinOp):
        return f"({to_text(node.left)}{node.op}{to_text(node.right)})"
    if isinstance(node, ast.Call):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, ast.BlaschkeNode):
        parts = []
        for a, m in node.zeros:
            parts.append(fmt_number(a) + (f":{m}" if m != 1 else ""))
        return "blaschke(" + "; ".join(parts) + ")"
    if isinstance(node, ast.PolyNode):
        return "poly(" + "; ".join(fmt_number(c) for c in node.coeffs) + ")"
    raise TypeError(f"unknown node {node!r}")


# -- polynomial recognition ---------------------------------------------------

def as_polynomial_coeffs(node):
    """Ascending coefficients if ``node`` is polynomial in ``z``, else ``None``."""
    if isinstance(node, ast.Const):
        return [node.value]
    if isinstance(node, ast.Var):
        return [0j, 1 + 0j]
    if isinstance(node, ast.PolyNode):
        return list(node.coeffs)
    if isinstance(node, ast.Neg):
        p = as_polynomial_coeffs(node.arg)
        return None if p is None else [-c for c in p]
    if isinstance(node, ast.BinOp):
        left = as_polynomial_coeffs(node.left)
        if left is None:
            return None
        if node.op == "^":
            n = ast.integer_exponent(node.right)
            if n is None or n < 0:
                return None
            out = [1 + 0j]
            for _ in range(n):
                out = _pmul(out, left)
            return out
        right = as_polynomial_coeffs(node.right)
        if right is None:
            return None
        if node.op == "+":
            return _padd(left, right)
        if node.op == "-":
            return _padd(left, [-c for c in right])
        if node.op == "*":
            return _pmul(left, right)
        if node.op == "/" and len(_trim(right)) == 1 and right[0] != 0:
            return [c / right[0] for c in left]
    return None


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _padd(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _pmul(p, q):
    out = [0j] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def from_node(node, domain=None):
    """Pick the most specific FunctionSpec variant for an expression tree."""
    if isinstance(node, ast.BlaschkeNode):
        return BlaschkeProduct(node.zeros, domain)
    coeffs = as_polynomial_coeffs(node)
    if coeffs is not None:
        coeffs = _trim(coeffs)
        if coeffs[-1] != 0:
            return Polynomial(tuple(coeffs), domain)
    return Expression(node, domain)


def constant(c):
    return Expression(ast.Const(complex(c)))


def log_modulus_of(spec):
    """Real-role spec ``logabs(f)`` for a holomorphic spec ``f``."""
    return Expression(ast.Call("logabs", spec.node()), spec.declared_domain())
