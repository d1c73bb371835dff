"""Prolongation of functions, vector fields, connections and metrics to U^A.

A-valued functions on U^A are represented by finite A-linear combinations of
lifts, ``phi = sum_a c_a * (h_a)^A``.  This span is closed under A-scaling,
products (``h1^A h2^A = (h1 h2)^A``) and differentiation along the frame
``d/dx_i^A``, which acts term-wise as ``(d_i h)^A``.  Vector fields on U^A are
n-tuples of such functions over that frame.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import expr as E
from .algebra import AElement, WeilAlgebra, broadcast_coeffs, get_zero_tolerance
from .calculus import APoint, lift_eval
from .errors import AlgebraMismatch, NonInvertible
from .expr import Expr, as_expr, diff
from .geometry import Connection, Metric, VectorField

__all__ = [
    "ALiftFunction", "AVectorField", "lift_function", "lift_vector_field",
    "apply_vector_field", "bracket_A", "nabla_A", "torsion_A", "metric_A",
    "nabla_A_g", "gram_matrix_A", "gram_invert_A", "amatrix_mul", "decompose",
    "reconstruct",
]

_ONE = E.const(1.0)


class ALiftFunction:
    """phi = sum c * h^A with c in A (possibly batched) and h a chart expression."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: WeilAlgebra, terms=()):
        self.algebra = algebra
        merged: dict = {}
        for c, h in terms:
            if not isinstance(c, AElement):
                c = algebra.constant(c)
            elif c.algebra != algebra:
                raise AlgebraMismatch("term coefficient lives in another algebra")
            h = as_expr(h)
            if isinstance(h, E.Const):
                if h.value == 0.0:
                    continue
                c, h = c * h.value, _ONE
            merged[h] = merged[h] + c if h in merged else c
        self.terms = tuple((c, h) for h, c in merged.items())

    @classmethod
    def lift(cls, algebra: WeilAlgebra, f) -> "ALiftFunction":
        return cls(algebra, [(algebra.unit(), f)])

    @classmethod
    def constant(cls, algebra: WeilAlgebra, a) -> "ALiftFunction":
        return cls(algebra, [(a, _ONE)])

    @classmethod
    def zero(cls, algebra: WeilAlgebra) -> "ALiftFunction":
        return cls(algebra)

    def __repr__(self):
        return f"ALiftFunction({len(self.terms)} terms: {[str(h) for _, h in self.terms][:4]})"

    def _check(self, other: "ALiftFunction"):
        if other.algebra != self.algebra:
            raise AlgebraMismatch(f"{self.algebra!r} vs {other.algebra!r}")

    def __add__(self, other):
        other = _as_lift(self.algebra, other)
        self._check(other)
        return ALiftFunction(self.algebra, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return ALiftFunction(self.algebra, [(-c, h) for c, h in self.terms])

    def __sub__(self, other):
        return self + (-_as_lift(self.algebra, other))

    def __rsub__(self, other):
        return _as_lift(self.algebra, other) - self

    def __mul__(self, other):
        if isinstance(other, (AElement, int, float, np.number)):
            return ALiftFunction(self.algebra, [(c * other, h) for c, h in self.terms])
        if isinstance(other, (AVectorField,)):
            return NotImplemented
        other = _as_lift(self.algebra, other)
        self._check(other)
        return ALiftFunction(self.algebra, [(c1 * c2, E.mul(h1, h2))
                                            for c1, h1 in self.terms for c2, h2 in other.terms])

    def __rmul__(self, other):
        return self * other

    def partial(self, i: int) -> "ALiftFunction":
        """Derivative along d/dx_i^A, i.e. sum c * (d_i h)^A."""
        return ALiftFunction(self.algebra, [(c, diff(h, i)) for c, h in self.terms])

    def evaluate(self, xi: APoint, cache: dict | None = None) -> AElement:
        if xi.algebra != self.algebra:
            raise AlgebraMismatch("near point lives in another algebra")
        if cache is None:
            cache = {}
        out = self.algebra.zero()
        for c, h in self.terms:
            out = out + c * lift_eval(h, xi, cache)
        return out

    __call__ = evaluate


def _as_lift(algebra, x) -> ALiftFunction:
    if isinstance(x, ALiftFunction):
        return x
    if isinstance(x, Expr):
        return ALiftFunction.lift(algebra, x)
    if isinstance(x, (AElement, int, float, np.number)):
        return ALiftFunction.constant(algebra, x)
    raise TypeError(f"cannot use {x!r} as an A-valued function")


class AVectorField:
    """X = sum_i f_i d/dx_i^A, an A-linear derivation of the lifted functions."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, coeffs: Sequence[ALiftFunction]):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("a vector field needs at least one coefficient")
        alg = coeffs[0].algebra
        if any(c.algebra != alg for c in coeffs):
            raise AlgebraMismatch("vector field coefficients live in different algebras")
        self.algebra = alg
        self.coeffs = coeffs

    @classmethod
    def frame(cls, algebra: WeilAlgebra, i: int, n: int) -> "AVectorField":
        """The coordinate field d/dx_i^A."""
        return cls([ALiftFunction.constant(algebra, 1.0) if k == i else ALiftFunction.zero(algebra)
                    for k in range(n)])

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self):
        return f"AVectorField(dim={self.dim}, terms={[len(c.terms) for c in self.coeffs]})"

    def _check(self, other):
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "AVectorField"):
        self._check(other)
        return AVectorField([a + b for a, b in zip(self, other)])

    def __sub__(self, other: "AVectorField"):
        self._check(other)
        return AVectorField([a - b for a, b in zip(self, other)])

    def __neg__(self):
        return AVectorField([-a for a in self])

    def __rmul__(self, phi):
        """phi * X for an A-valued function, an element of A or a real."""
        if isinstance(phi, Expr):
            phi = ALiftFunction.lift(self.algebra, phi)
        return AVectorField([phi * c if isinstance(phi, ALiftFunction) else c * phi for c in self])

    def __call__(self, phi) -> ALiftFunction:
        return apply_vector_field(self, phi)

    def evaluate(self, xi: APoint, cache: dict | None = None) -> np.ndarray:
        """Coefficient values at xi, shape (n, dim A, *batch)."""
        if cache is None:
            cache = {}
        return np.stack(broadcast_coeffs([c.evaluate(xi, cache).coeffs for c in self.coeffs]))


# -- lifts ----------------------------------------------------------------

def lift_function(f, algebra: WeilAlgebra) -> ALiftFunction:
    """f^A as a single-term A-valued function."""
    return ALiftFunction.lift(algebra, f)


def lift_vector_field(theta: VectorField, algebra: WeilAlgebra) -> AVectorField:
    """theta^A, the unique A-linear derivation with theta^A(f^A) = (theta f)^A."""
    return AVectorField([lift_function(c, algebra) for c in theta])


def apply_vector_field(X: AVectorField, phi) -> ALiftFunction:
    """X(phi) = sum_i f_i * d phi / dx_i^A."""
    phi = _as_lift(X.algebra, phi)
    if phi.algebra != X.algebra:
        raise AlgebraMismatch("vector field and function live in different algebras")
    out = ALiftFunction.zero(X.algebra)
    for i, f in enumerate(X.coeffs):
        if f.terms:
            out = out + f * phi.partial(i)
    return out


def bracket_A(X: AVectorField, Y: AVectorField) -> AVectorField:
    """[X, Y] = X o Y - Y o X, coefficient-wise X(g_k) - Y(f_k)."""
    X._check(Y)
    return AVectorField([X(g) - Y(f) for f, g in zip(X.coeffs, Y.coeffs)])


def nabla_A(conn: Connection, X: AVectorField, Y: AVectorField) -> AVectorField:
    """Prolonged covariant derivative: X(g_k) + sum_ij f_i g_j (gamma^k_ij)^A."""
    X._check(Y)
    if conn.dim != X.dim:
        raise ValueError("connection and vector fields have different dimensions")
    n = X.dim
    out = []
    for k in range(n):
        c = X(Y[k])
        for i in range(n):
            for j in range(n):
                gk = conn[k, i, j]
                if not gk.is_const(0.0):
                    c = c + X[i] * Y[j] * gk
        out.append(c)
    return AVectorField(out)


def torsion_A(conn: Connection, X: AVectorField, Y: AVectorField) -> AVectorField:
    return nabla_A(conn, X, Y) - nabla_A(conn, Y, X) - bracket_A(X, Y)


def metric_A(g: Metric, X: AVectorField, Y: AVectorField) -> ALiftFunction:
    """g^A(X, Y) = sum_ij f_i g_j (g_ij)^A."""
    X._check(Y)
    out = ALiftFunction.zero(X.algebra)
    for i in range(g.dim):
        for j in range(g.dim):
            if not g[i, j].is_const(0.0):
                out = out + X[i] * Y[j] * g[i, j]
    return out


def nabla_A_g(conn: Connection, g: Metric, X: AVectorField, Y: AVectorField,
              Z: AVectorField) -> ALiftFunction:
    """(nabla^A_X g^A)(Y, Z) = X[g^A(Y,Z)] - g^A(nabla^A_X Y, Z) - g^A(Y, nabla^A_X Z)."""
    return (X(metric_A(g, Y, Z)) - metric_A(g, nabla_A(conn, X, Y), Z)
            - metric_A(g, Y, nabla_A(conn, X, Z)))


# -- Gram matrix over A ---------------------------------------------------

def gram_matrix_A(g: Metric, xi: APoint) -> np.ndarray:
    """G_ij = (g_ij)^A(xi) as an array of shape (n, n, dim A, *batch)."""
    cache: dict = {}
    n = g.dim
    vals = broadcast_coeffs([lift_eval(g[i, j], xi, cache).coeffs for i in range(n) for j in range(n)])
    return np.stack(vals).reshape((n, n) + vals[0].shape)


def amatrix_mul(algebra: WeilAlgebra, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Product of matrices with entries in A, both shaped (n, n, dim A, *batch)."""
    Pd = np.moveaxis(P, 2, 0)[:, :, :, None]
    Qd = np.moveaxis(Q, 2, 0)[:, None, :, :]
    prod = algebra._mul_coeffs(Pd, Qd)  # (d, n, n, n, *batch)
    return np.moveaxis(prod.sum(axis=2), 0, 2)


def _embed_real(algebra: WeilAlgebra, M: np.ndarray) -> np.ndarray:
    """Real (n, n, *batch) matrix as an A-matrix (n, n, dim A, *batch)."""
    out = np.zeros(M.shape[:2] + (algebra.dim,) + M.shape[2:])
    out[:, :, 0] = M
    return out


def gram_invert_A(g: Metric, xi: APoint, zero_tol: float | None = None):
    """Inverse of the Gram matrix over A by a finite Neumann series.

    Splits G = G0 + N with G0 real and N nilpotent, and returns
    sum_{j<=k} (-G0^-1 N)^j G0^-1 as an n x n nested list of AElements.
    Raises :class:`NonInvertible` when det G0 vanishes, i.e. the base metric
    degenerates at pi(xi).
    """
    inv = _gram_inverse_array(g, xi, zero_tol)
    alg = xi.algebra
    return [[AElement(alg, inv[i, j]) for j in range(g.dim)] for i in range(g.dim)]


def _gram_inverse_array(g: Metric, xi: APoint, zero_tol=None):
    tol = get_zero_tolerance() if zero_tol is None else zero_tol
    alg = xi.algebra
    G = gram_matrix_A(g, xi)
    G0 = G[:, :, 0]
    G0b = np.moveaxis(G0, (0, 1), (-2, -1))
    det = np.linalg.det(G0b)
    if np.any(np.abs(det) <= tol):
        raise NonInvertible("Gram matrix is singular at the base point")
    G0inv = np.moveaxis(np.linalg.inv(G0b), (-2, -1), (0, 1))
    N = G.copy()
    N[:, :, 0] = 0.0
    step = -amatrix_mul(alg, _embed_real(alg, G0inv), N)
    term = _embed_real(alg, G0inv)
    total = term
    for _ in range(alg.truncation_order):
        term = amatrix_mul(alg, step, term)
        total = total + term
    return total


def gram_residual(g: Metric, xi: APoint, zero_tol: float | None = None) -> float:
    """max |G G^-1 - I| over entries and coefficients."""
    alg = xi.algebra
    G = gram_matrix_A(g, xi)
    inv = _gram_inverse_array(g, xi, zero_tol)
    prod = amatrix_mul(alg, G, inv)
    ident = _embed_real(alg, np.broadcast_to(
        np.eye(g.dim).reshape((g.dim, g.dim) + (1,) * (prod.ndim - 3)), prod.shape[:2] + prod.shape[3:]))
    return float(np.max(np.abs(prod - ident)))


# -- component decomposition ----------------------------------------------

def decompose(phi: ALiftFunction, xi: APoint, basis: Sequence[AElement] | None = None):
    """Split phi(xi) as sum_alpha a_alpha * value_alpha.

    With the default monomial basis the values are the coefficient
    projections; any other basis of A may be passed and its dual basis is
    used.  ``decompose(lift_function(f, A), xi)`` is the image of f under the
    composite homomorphism into A (x) C(U^A).
    """
    val = phi.evaluate(xi) if isinstance(phi, ALiftFunction) else phi
    alg = val.algebra
    if basis is None:
        return [(alg.basis_element(a), val.coeffs[a]) for a in range(alg.dim)]
    basis = list(basis)
    if len(basis) != alg.dim:
        raise ValueError(f"a basis of A needs {alg.dim} elements, got {len(basis)}")
    B = np.stack([b.coeffs for b in basis], axis=1)  # columns are basis vectors
    flat = val.coeffs.reshape(alg.dim, -1)
    dual = np.linalg.solve(B, flat).reshape(val.coeffs.shape)
    return [(b, dual[a]) for a, b in enumerate(basis)]


def reconstruct(pairs) -> AElement:
    """sum_alpha a_alpha * value_alpha."""
    out = None
    for a, v in pairs:
        term = a * np.asarray(v, dtype=float)
        out = term if out is None else out + term
    return out
