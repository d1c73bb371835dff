"""Lifting chart functions to near points: f -> f^A evaluated at xi in A^n.

Two independent routes are provided.  :func:`lift_eval` interprets the
expression tree directly in A-arithmetic, expanding each primitive in a
truncated Taylor series around the real part of its argument.
:func:`taylor_oracle` never looks inside the tree: it takes mixed partials of
the whole expression symbolically and sums ``d^a f(x) h^a / a!`` over
multi-indices with ``|a| <= k``.
"""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .algebra import AElement, WeilAlgebra, construct_algebra, tensor_product
from .errors import AlgebraMismatch, DomainError
from .expr import Expr, as_expr, diff, evaluate, interpret

__all__ = ["APoint", "lift_eval", "taylor_oracle", "a_partial", "primitive_derivatives"]


class APoint:
    """Near point given by its chart coordinates (xi_1, ..., xi_n) in A^n."""

    __slots__ = ("algebra", "coords")

    def __init__(self, coords: Sequence[AElement]):
        coords = tuple(coords)
        if not coords:
            raise ValueError("a near point needs at least one coordinate")
        alg = coords[0].algebra
        for c in coords[1:]:
            if c.algebra != alg:
                raise AlgebraMismatch("near-point coordinates live in different algebras")
        self.algebra = alg
        self.coords = coords

    @classmethod
    def from_real(cls, algebra: WeilAlgebra, point: Sequence) -> "APoint":
        return cls([algebra.constant(x) for x in point])

    @property
    def dim(self) -> int:
        return len(self.coords)

    def base_point(self) -> tuple:
        """Projection pi(xi): the real parts of the coordinates."""
        return tuple(c.coeffs[0] for c in self.coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __repr__(self):
        return f"APoint({list(self.coords)!r})"


def primitive_derivatives(name: str, c, order: int) -> list:
    """Values g(c), g'(c), ..., g^(order)(c) of a primitive, in closed form."""
    c = np.asarray(c, dtype=float)
    if name == "sin":
        cyc = [np.sin(c), np.cos(c), -np.sin(c), -np.cos(c)]
        return [cyc[j % 4] for j in range(order + 1)]
    if name == "cos":
        cyc = [np.cos(c), -np.sin(c), -np.cos(c), np.sin(c)]
        return [cyc[j % 4] for j in range(order + 1)]
    if name == "exp":
        e = np.exp(c)
        return [e] * (order + 1)
    if name == "log":
        if np.any(c <= 0):
            raise DomainError("log of an element with non-positive real part")
        return [np.log(c)] + [(-1) ** (j - 1) * math.factorial(j - 1) / c ** j
                              for j in range(1, order + 1)]
    if name == "sqrt":
        if np.any(c < 0) or (order > 0 and np.any(c == 0)):
            raise DomainError("sqrt of an element with non-positive real part")
        out, coef = [], 1.0
        for j in range(order + 1):
            out.append(coef * c ** (0.5 - j))
            coef *= 0.5 - j
        return out
    raise ValueError(f"unknown primitive {name!r}")


class _WeilOps:
    """Tree operations over A; leaves may still be plain floats."""

    def __init__(self, algebra: WeilAlgebra):
        self.order = algebra.truncation_order

    @staticmethod
    def const(c):
        return c

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def div(a, b):
        if not isinstance(b, AElement) and np.any(np.asarray(b) == 0):
            raise DomainError("division by zero")
        return a / b

    @staticmethod
    def pow(a, n):
        if not isinstance(a, AElement) and n < 0 and np.any(np.asarray(a) == 0):
            raise DomainError("negative power of zero")
        return a ** n

    def func(self, name, a):
        if not isinstance(a, AElement):
            return primitive_derivatives(name, a, 0)[0]
        return a.apply_series(primitive_derivatives(name, a.coeffs[0], self.order))


def lift_eval(f: Expr, xi: APoint, cache: dict | None = None) -> AElement:
    """Value f^A(xi), computed by interpreting the tree in A-arithmetic."""
    f = as_expr(f)
    ops = _WeilOps(xi.algebra)

    def leaf(i):
        if i >= xi.dim:
            raise IndexError(f"variable x{i + 1} is outside a {xi.dim}-dimensional chart")
        return xi.coords[i]

    out = interpret(f, leaf, ops, cache)
    if not isinstance(out, AElement):
        out = xi.algebra.constant(out)
    return out


def _multi_indices(n: int, k: int):
    for alpha in itertools.product(range(k + 1), repeat=n):
        if sum(alpha) <= k:
            yield alpha


def taylor_oracle(f: Expr, xi: APoint) -> AElement:
    """f^A(xi) from the multivariate Taylor formula around pi(xi)."""
    f = as_expr(f)
    alg = xi.algebra
    x = xi.base_point()
    h = [c.nilpotent_part() for c in xi.coords]
    total = alg.constant(evaluate(f, x))
    for alpha in _multi_indices(xi.dim, alg.truncation_order):
        if sum(alpha) == 0:
            continue
        d = f
        for i, a in enumerate(alpha):
            for _ in range(a):
                d = diff(d, i)
        if d.is_const(0.0):
            continue
        mono = None
        for i, a in enumerate(alpha):
            if a:
                p = h[i] ** a
                mono = p if mono is None else mono * p
        weight = math.prod(math.factorial(a) for a in alpha)
        total = total + mono * (np.asarray(evaluate(d, x)) / weight)
    return total


def a_partial(f: Expr, xi: APoint, i: int) -> AElement:
    """i-th partial of the A-valued map f^A at xi, via a dual-number shift.

    Works in A (x) R[d]/(d^2): f^A(xi + d e_i) = f^A(xi) + d * df^A/dxi_i,
    and reads off the d-component.  Uses only :func:`taylor_oracle`.
    """
    alg = xi.algebra
    big = tensor_product(alg, construct_algebra({"kind": "dual"}))
    r = alg.num_generators
    batch = xi.coords[0].batch_shape

    def embed(u: AElement) -> AElement:
        c = np.zeros((big.dim,) + u.batch_shape)
        for a, e in enumerate(alg.basis):
            c[big.index_of(e + (0,))] = u.coeffs[a]
        return AElement(big, c)

    delta = big.generator(r + 1)
    coords = [embed(c) for c in xi.coords]
    coords[i] = coords[i] + delta
    shifted = taylor_oracle(f, APoint(coords))
    out = np.zeros((alg.dim,) + np.broadcast_shapes(batch, shifted.batch_shape))
    for a, e in enumerate(alg.basis):
        out[a] = shifted.coeffs[big.index_of(e + (1,))]
    return AElement(alg, out)
