"""Weil algebras as truncated monomial quotients of R[e1, ..., er].

An algebra is fixed by the number of nilpotent generators ``r``, a
truncation order ``k`` (every monomial of total degree > k vanishes) and an
optional set of extra monomials declared zero.  Elements carry a coefficient
vector over the surviving monomials, in degree-lexicographic order with the
unit monomial first.  Coefficient arrays may carry trailing batch axes, so a
single :class:`AElement` can hold one element per probe point.
"""
from __future__ import annotations

import contextlib
import contextvars
import itertools
import math
from typing import Iterable, Sequence

import numpy as np

from .errors import AlgebraMismatch, ConfigError, NonInvertible

__all__ = [
    "WeilAlgebra",
    "AElement",
    "construct_algebra",
    "tensor_product",
    "mul",
    "augment",
    "invert",
    "component",
    "zero_tolerance",
    "get_zero_tolerance",
    "DEFAULT_ZERO_TOL",
    "broadcast_coeffs",
]

DEFAULT_ZERO_TOL = 1e-12
_zero_tol = contextvars.ContextVar("weilgeom_zero_tol", default=DEFAULT_ZERO_TOL)


def get_zero_tolerance() -> float:
    return _zero_tol.get()


@contextlib.contextmanager
def zero_tolerance(value: float):
    """Temporarily change the invertibility threshold on the real part."""
    if not value >= 0:
        raise ValueError(f"zero tolerance must be non-negative, got {value!r}")
    token = _zero_tol.set(float(value))
    try:
        yield
    finally:
        _zero_tol.reset(token)


def _divides(m: tuple[int, ...], e: tuple[int, ...]) -> bool:
    return all(a <= b for a, b in zip(m, e))


def _monomials(r: int, max_degree: int):
    for exps in itertools.product(range(max_degree + 1), repeat=r):
        if sum(exps) <= max_degree:
            yield exps


def _deglex_key(e: tuple[int, ...]):
    return (sum(e), tuple(-x for x in e))


class WeilAlgebra:
    """Monomial-ideal quotient R[e1..er] / (degree > k, zero_monomials).

    Parameters
    ----------
    num_generators : int
        Number ``r`` of nilpotent generators.  ``r = 0`` gives the reals and
        must be requested without a truncation order.
    truncation_order : int, optional
        ``k >= 1``; all monomials of total degree above ``k`` vanish.
    zero_monomials : iterable of exponent vectors
        Extra monomials declared zero (``(2, 0)`` kills ``e1**2``).
    """

    def __init__(self, num_generators: int, truncation_order: int | None = None,
                 zero_monomials: Iterable[Sequence[int]] = ()):
        r = num_generators
        if not isinstance(r, (int, np.integer)) or isinstance(r, bool) or r < 0:
            raise ConfigError(f"num_generators must be a non-negative integer, got {r!r}")
        r = int(r)
        if r == 0:
            if truncation_order not in (None, 0):
                raise ConfigError("the zero-generator algebra (the reals) takes no truncation order")
            k = 0
        else:
            if truncation_order is None:
                raise ConfigError("truncation_order is required when num_generators > 0")
            if (not isinstance(truncation_order, (int, np.integer)) or isinstance(truncation_order, bool)
                    or truncation_order < 1):
                raise ConfigError(f"truncation_order must be an integer >= 1, got {truncation_order!r}")
            k = int(truncation_order)

        relations = set()
        for m in zero_monomials:
            m = tuple(m)
            if len(m) != r or any(not isinstance(x, (int, np.integer)) or isinstance(x, bool) or x < 0
                                  for x in m):
                raise ConfigError(f"malformed exponent vector {list(m)!r} for {r} generators")
            m = tuple(int(x) for x in m)
            if sum(m) == 0:
                raise ConfigError("the unit monomial cannot be declared zero")
            if sum(m) <= k:
                relations.add(m)
        # keep only the minimal generators of the monomial ideal
        relations = {m for m in relations
                     if not any(o != m and _divides(o, m) for o in relations)}

        self.num_generators = r
        self.truncation_order = k
        self.zero_monomials = tuple(sorted(relations, key=_deglex_key))
        self.basis = tuple(sorted(
            (e for e in _monomials(r, k)
             if not any(_divides(m, e) for m in self.zero_monomials)),
            key=_deglex_key))
        self.dim = len(self.basis)
        self._index = {e: i for i, e in enumerate(self.basis)}

        d = self.dim
        table = np.full((d, d), -1, dtype=np.int64)
        for i, ei in enumerate(self.basis):
            for j, ej in enumerate(self.basis):
                prod = tuple(a + b for a, b in zip(ei, ej))
                table[i, j] = self._index.get(prod, -1)
        table.setflags(write=False)
        self.structure_constants = table

        mult = np.zeros((d, d * d))
        for i in range(d):
            for j in range(d):
                if table[i, j] >= 0:
                    mult[table[i, j], i * d + j] = 1.0
        mult.setflags(write=False)
        self._mult = mult
        self._degrees = np.array([sum(e) for e in self.basis])

        if self.associativity_violations() or self.commutativity_violations():
            raise AssertionError("structure table is not a commutative associative algebra")

    # -- identity -------------------------------------------------------
    def _key(self):
        return (self.num_generators, self.truncation_order, self.zero_monomials)

    def __eq__(self, other):
        return isinstance(other, WeilAlgebra) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        rel = f", zero_monomials={[list(m) for m in self.zero_monomials]}" if self.zero_monomials else ""
        return f"WeilAlgebra(r={self.num_generators}, k={self.truncation_order}{rel}, dim={self.dim})"

    def monomial_name(self, alpha: int) -> str:
        e = self.basis[alpha]
        if sum(e) == 0:
            return "1"
        parts = []
        for g, p in enumerate(e, start=1):
            if p == 1:
                parts.append(f"e{g}")
            elif p > 1:
                parts.append(f"e{g}^{p}")
        return "*".join(parts)

    def descriptor(self) -> dict:
        """JSON-ready descriptor that reconstructs this algebra."""
        return {"kind": "custom", "vars": self.num_generators,
                "order": self.truncation_order,
                "zero_monomials": [list(m) for m in self.zero_monomials]}

    # -- structure checks -----------------------------------------------
    def _absorbing_table(self):
        d = self.dim
        t = np.full((d + 1, d + 1), d, dtype=np.int64)
        t[:d, :d] = np.where(self.structure_constants < 0, d, self.structure_constants)
        return t

    def associativity_violations(self) -> int:
        """Number of basis triples with (ab)c != a(bc); exhaustive."""
        t = self._absorbing_table()
        d = self.dim
        idx = np.arange(d)
        left = t[t[idx[:, None, None], idx[None, :, None]], idx[None, None, :]]
        right = t[idx[:, None, None], t[idx[None, :, None], idx[None, None, :]]]
        return int(np.count_nonzero(left != right))

    def commutativity_violations(self) -> int:
        t = self.structure_constants
        return int(np.count_nonzero(t != t.T))

    @property
    def nilpotency_order(self) -> int:
        """Smallest N with m**N = 0 for the maximal ideal m."""
        return int(self._degrees.max()) + 1

    # -- element factories ----------------------------------------------
    def element(self, coeffs) -> "AElement":
        return AElement(self, coeffs)

    def zero(self) -> "AElement":
        return AElement(self, np.zeros(self.dim))

    def unit(self) -> "AElement":
        return self.constant(1.0)

    def constant(self, value) -> "AElement":
        value = np.asarray(value, dtype=float)
        c = np.zeros((self.dim,) + value.shape)
        c[0] = value
        return AElement(self, c)

    def basis_element(self, alpha: int) -> "AElement":
        if not 0 <= alpha < self.dim:
            raise IndexError(f"basis index {alpha} out of range for dim {self.dim}")
        c = np.zeros(self.dim)
        c[alpha] = 1.0
        return AElement(self, c)

    def generator(self, g: int) -> "AElement":
        """The nilpotent generator e_g (1-based, as in the monomial names)."""
        e = tuple(1 if i == g - 1 else 0 for i in range(self.num_generators))
        if e not in self._index:
            raise IndexError(f"generator e{g} is not a surviving monomial")
        return self.basis_element(self._index[e])

    def index_of(self, exponents: Sequence[int]) -> int:
        return self._index[tuple(exponents)]

    def random(self, rng: np.random.Generator, size=None, low=-1.0, high=1.0) -> "AElement":
        shape = (self.dim,) if size is None else (self.dim,) + tuple(np.atleast_1d(size))
        return AElement(self, rng.uniform(low, high, size=shape))

    # -- raw coefficient arithmetic -------------------------------------
    def _mul_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        d = self.dim
        if a.shape == b.shape:
            batch = a.shape[1:]
        else:
            batch = np.broadcast_shapes(a.shape[1:], b.shape[1:])
            a = a.reshape((d,) + (1,) * (len(batch) - a.ndim + 1) + a.shape[1:])
            b = b.reshape((d,) + (1,) * (len(batch) - b.ndim + 1) + b.shape[1:])
        outer = a[:, None] * b[None, :]
        if outer.shape[2:] != batch:
            outer = np.broadcast_to(outer, (d, d) + batch)
        return (self._mult @ outer.reshape(d * d, -1)).reshape((d,) + batch)


class AElement:
    """A point of a Weil algebra, possibly batched along trailing axes."""

    __slots__ = ("algebra", "coeffs")
    __array_ufunc__ = None  # keep numpy scalars from hijacking our operators

    def __init__(self, algebra: WeilAlgebra, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim == 0 or coeffs.shape[0] != algebra.dim:
            raise ValueError(f"coefficient vector of shape {coeffs.shape} does not match dim {algebra.dim}")
        self.algebra = algebra
        self.coeffs = coeffs

    @property
    def batch_shape(self):
        return self.coeffs.shape[1:]

    def __repr__(self):
        if self.batch_shape:
            return f"AElement(dim={self.algebra.dim}, batch={self.batch_shape})"
        out = f"{float(self.coeffs[0])!r}"
        for alpha in range(1, self.algebra.dim):
            c = float(self.coeffs[alpha])
            if c != 0:
                sign = " - " if c < 0 else " + "
                out += f"{sign}{abs(c)!r}*{self.algebra.monomial_name(alpha)}"
        return f"AElement({out})"

    def _coerce(self, other):
        if isinstance(other, AElement):
            if other.algebra is not self.algebra and other.algebra != self.algebra:
                raise AlgebraMismatch(f"{self.algebra!r} vs {other.algebra!r}")
            return other
        if isinstance(other, (int, float, np.number, np.ndarray)):
            return self.algebra.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return AElement(self.algebra, _padd(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return AElement(self.algebra, -self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return AElement(self.algebra, _padd(self.coeffs, -other.coeffs))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, np.number, np.ndarray)):
            return AElement(self.algebra, _scale(self.coeffs, other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return AElement(self.algebra, self.algebra._mul_coeffs(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.number, np.ndarray)):
            return AElement(self.algebra, _scale(self.coeffs, 1.0 / np.asarray(other, dtype=float)))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * invert(other)

    def __rtruediv__(self, other):
        return invert(self) * other

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("only integer powers are defined on AElement")
        if n < 0:
            return invert(self) ** (-n)
        result = self.algebra.constant(np.ones(self.batch_shape))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def augment(self):
        return self.coeffs[0]

    def nilpotent_part(self) -> "AElement":
        c = self.coeffs.copy()
        c[0] = 0.0
        return AElement(self.algebra, c)

    def apply_series(self, derivatives: Sequence) -> "AElement":
        """Evaluate g(c + n) = sum_j g^(j)(c) n^j / j! from derivative values at c."""
        n = self.nilpotent_part()
        out = self.algebra.constant(derivatives[0])
        power = None
        for j in range(1, min(len(derivatives), self.algebra.truncation_order + 1)):
            power = n if power is None else power * n
            out = out + power * (np.asarray(derivatives[j]) / math.factorial(j))
        return out

    def allclose(self, other, atol=1e-12) -> bool:
        other = self._coerce(other)
        return bool(np.all(np.abs(_padd(self.coeffs, -other.coeffs)) <= atol))


def _scale(coeffs: np.ndarray, s) -> np.ndarray:
    """Multiply coefficients by a real scalar or a real batch array."""
    s = np.asarray(s, dtype=float)
    if s.ndim == 0:
        return coeffs * s
    pad = s.ndim - (coeffs.ndim - 1)
    if pad > 0:
        coeffs = coeffs.reshape(coeffs.shape[:1] + (1,) * pad + coeffs.shape[1:])
    return coeffs * s


def broadcast_coeffs(arrays) -> list:
    """Broadcast coefficient arrays shaped (dim, *batch) to one common batch shape."""
    batch = np.broadcast_shapes(*(a.shape[1:] for a in arrays))
    out = []
    for a in arrays:
        a = a.reshape(a.shape[:1] + (1,) * (len(batch) - a.ndim + 1) + a.shape[1:])
        out.append(np.broadcast_to(a, a.shape[:1] + batch))
    return out


def _padd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Add coefficient arrays whose batch axes may differ in rank."""
    if a.ndim < b.ndim:
        a = a.reshape(a.shape[:1] + (1,) * (b.ndim - a.ndim) + a.shape[1:])
    elif b.ndim < a.ndim:
        b = b.reshape(b.shape[:1] + (1,) * (a.ndim - b.ndim) + b.shape[1:])
    return a + b


# -- functional surface ---------------------------------------------------

def mul(u: AElement, v: AElement) -> AElement:
    if not isinstance(u, AElement) or not isinstance(v, AElement):
        raise TypeError("mul expects two AElements")
    return u * v


def augment(u: AElement):
    """Projection A -> R onto the unit monomial."""
    return u.coeffs[0]


def component(u: AElement, alpha: int):
    if not 0 <= alpha < u.algebra.dim:
        raise IndexError(f"basis index {alpha} out of range for dim {u.algebra.dim}")
    return u.coeffs[alpha]


def invert(u: AElement, zero_tol: float | None = None) -> AElement:
    """Inverse via the finite Neumann series c^-1 sum_j (-n/c)^j."""
    tol = get_zero_tolerance() if zero_tol is None else zero_tol
    c = u.coeffs[0]
    if np.any(np.abs(c) <= tol):
        raise NonInvertible(f"real part {np.min(np.abs(c))!r} is within {tol!r} of zero")
    q = u.nilpotent_part() * (-1.0 / c)
    total = u.algebra.constant(np.ones(np.shape(c)))
    power = total
    for _ in range(u.algebra.truncation_order):
        power = power * q
        total = total + power
    return total * (1.0 / c)


def tensor_product(a: WeilAlgebra, b: WeilAlgebra) -> WeilAlgebra:
    """A (x) B on r_A + r_B generators, truncation order k_A + k_B."""
    ra, rb = a.num_generators, b.num_generators
    relations = [tuple(m) + (0,) * rb for m in a.zero_monomials]
    relations += [(0,) * ra + tuple(m) for m in b.zero_monomials]
    if ra:
        relations += [e + (0,) * rb for e in _monomials(ra, a.truncation_order + 1)
                      if sum(e) == a.truncation_order + 1]
    if rb:
        relations += [(0,) * ra + e for e in _monomials(rb, b.truncation_order + 1)
                      if sum(e) == b.truncation_order + 1]
    r = ra + rb
    if r == 0:
        return WeilAlgebra(0)
    return WeilAlgebra(r, a.truncation_order + b.truncation_order, relations)


def _require_int(desc: dict, key: str, minimum: int):
    if key not in desc:
        raise ConfigError(f"algebra descriptor of kind {desc.get('kind')!r} needs field {key!r}")
    value = desc[key]
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"algebra field {key!r} must be an integer >= {minimum}, got {value!r}")
    return value


def construct_algebra(desc) -> WeilAlgebra:
    """Build an algebra from a JSON-style descriptor.

    Recognized kinds: ``jet`` (vars, order), ``dual``, ``hyperdual`` (vars),
    ``tensor`` (factors), ``custom`` (vars, order, zero_monomials) and
    ``real``.  A :class:`WeilAlgebra` passes through unchanged.
    """
    if isinstance(desc, WeilAlgebra):
        return desc
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(f"algebra descriptor must be an object with a 'kind' field, got {desc!r}")
    kind = desc["kind"]
    if kind == "real":
        return WeilAlgebra(0)
    if kind == "dual":
        return WeilAlgebra(1, 1)
    if kind == "jet":
        r = _require_int(desc, "vars", 0)
        if r == 0:
            if desc.get("order") not in (None, 0):
                raise ConfigError("jet algebra with vars=0 takes no order")
            return WeilAlgebra(0)
        return WeilAlgebra(r, _require_int(desc, "order", 1))
    if kind == "hyperdual":
        r = _require_int(desc, "vars", 1)
        squares = [tuple(2 if i == j else 0 for i in range(r)) for j in range(r)]
        return WeilAlgebra(r, r, squares)
    if kind == "tensor":
        factors = desc.get("factors")
        if not isinstance(factors, list) or not factors:
            raise ConfigError("tensor algebra needs a non-empty 'factors' list")
        out = construct_algebra(factors[0])
        for f in factors[1:]:
            out = tensor_product(out, construct_algebra(f))
        return out
    if kind == "custom":
        r = _require_int(desc, "vars", 0)
        zm = desc.get("zero_monomials", [])
        if not isinstance(zm, list):
            raise ConfigError("'zero_monomials' must be a list of exponent vectors")
        if r == 0:
            return WeilAlgebra(0, desc.get("order"), zm)
        return WeilAlgebra(r, _require_int(desc, "order", 1), zm)
    raise ConfigError(f"unknown algebra kind {kind!r}")
