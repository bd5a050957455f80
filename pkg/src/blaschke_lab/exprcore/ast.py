"""Expression tree nodes and their vectorized evaluation.

All nodes evaluate on numpy complex arrays; real-valued functions (``abs``,
``logabs``, ``re``, ``im``) return arrays with zero imaginary part so that
every node composes with every other one. ``logabs`` of an exact zero gives
``-inf`` (IEEE), never a large negative sentinel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNARY_FUNCTIONS = ("abs", "exp", "logabs", "re", "im", "conj")


class Node:
    __slots__ = ()

    def has_variable(self):
        return any(child.has_variable() for child in self.children())

    def children(self):
        return ()


@dataclass(frozen=True)
class Const(Node):
    value: complex

    def evaluate(self, z):
        return np.full(np.shape(z), self.value, dtype=complex)

    def has_variable(self):
        return False


@dataclass(frozen=True)
class Var(Node):
    def evaluate(self, z):
        return np.asarray(z, dtype=complex)

    def has_variable(self):
        return True


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def evaluate(self, z):
        return -self.arg.evaluate(z)

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, z):
        a = self.left.evaluate(z)
        if self.op == "^":
            n = integer_exponent(self.right)
            if n is not None:
                return int_power(a, n)
        b = self.right.evaluate(z)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return np.power(a, b)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Call(Node):
    name: str
    arg: Node

    def evaluate(self, z):
        a = self.arg.evaluate(z)
        if self.name == "abs":
            return np.abs(a).astype(complex)
        if self.name == "exp":
            return np.exp(a)
        if self.name == "logabs":
            return np.log(np.abs(a)).astype(complex)
        if self.name == "re":
            return a.real.astype(complex)
        if self.name == "im":
            return a.imag.astype(complex)
        return np.conj(a)

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class BlaschkeNode(Node):
    """Blaschke product with explicit multiplicities: ``((zero, mult), ...)``."""

    zeros: tuple

    def evaluate(self, z):
        return blaschke_values(self.zeros, z)

    def has_variable(self):
        return True


@dataclass(frozen=True)
class PolyNode(Node):
    """Polynomial with ascending coefficients ``c0 + c1 z + ...``."""

    coeffs: tuple

    def evaluate(self, z):
        return horner(self.coeffs, z)

    def has_variable(self):
        return len(self.coeffs) > 1


def integer_exponent(node):
    if isinstance(node, Neg):
        inner = integer_exponent(node.arg)
        return None if inner is None else -inner
    if isinstance(node, Const):
        v = node.value
        if v.imag == 0 and float(v.real).is_integer() and abs(v.real) <= 4096:
            return int(v.real)
    return None


def int_power(a, n):
    """Exact-as-possible integer power by repeated squaring."""
    if n < 0:
        return 1.0 / int_power(a, -n)
    result = np.ones_like(a)
    base = a
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def horner(coeffs, z):
    z = np.asarray(z, dtype=complex)
    out = np.zeros(np.shape(z), dtype=complex)
    for c in reversed(coeffs):
        out = out * z + c
    return out


def blaschke_values(zeros, z):
    z = np.asarray(z, dtype=complex)
    out = np.ones(np.shape(z), dtype=complex)
    for a, m in zeros:
        if a == 0:
            factor = z
        else:
            u = a / max(abs(a.real), abs(a.imag))  # rescale so subnormal zeros keep a unimodular factor
            factor = (abs(u) / u) * (a - z) / (1.0 - np.conj(a) * z)
        out = out * int_power(factor, m)
    return out
