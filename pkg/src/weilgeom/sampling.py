"""Random near points, chart functions and A-fields for property checks.

Base coordinates are drawn uniformly from the chart's sampling box (rejected
against its domain guard); nilpotent coefficients are uniform in [-1, 1].
Random functions are short polynomials plus one sin/cos/exp of a linear form,
so they are defined on every chart.  General A-fields carry A-coefficients
that are independent per probe point (batched), while their chart
expressions are shared across the batch.
"""
from __future__ import annotations

import numpy as np

from . import expr as E
from .algebra import AElement, WeilAlgebra
from .calculus import APoint
from .geometry import Chart, VectorField
from .prolong import ALiftFunction, AVectorField

__all__ = [
    "near_point", "random_polynomial", "random_function", "random_vector_field",
    "random_lift_function", "random_a_field", "random_invertible", "random_nilpotent",
]


def _coef(rng) -> float:
    return float(np.round(rng.uniform(-1.0, 1.0), 3)) or 0.5


def near_point(algebra: WeilAlgebra, chart: Chart, rng: np.random.Generator, size: int) -> APoint:
    base = chart.sample(rng, size)
    coords = []
    for i in range(chart.dim):
        c = rng.uniform(-1.0, 1.0, size=(algebra.dim, size))
        c[0] = base[i]
        coords.append(AElement(algebra, c))
    return APoint(coords)


def random_polynomial(n: int, rng: np.random.Generator, max_degree: int = 2, n_terms: int = 3) -> E.Expr:
    x = E.variables(n)
    out = E.const(_coef(rng))
    for _ in range(n_terms):
        mono = E.const(_coef(rng))
        for _ in range(int(rng.integers(1, max_degree + 1))):
            mono = E.mul(mono, x[int(rng.integers(n))])
        out = E.add(out, mono)
    return out


def random_function(n: int, rng: np.random.Generator, trig: bool = True) -> E.Expr:
    f = random_polynomial(n, rng)
    if not trig:
        return f
    x = E.variables(n)
    lin = E.add(E.const(_coef(rng)), E.mul(E.const(_coef(rng)), x[int(rng.integers(n))]))
    prim = (E.sin, E.cos, E.exp)[int(rng.integers(3))]
    return E.add(f, E.mul(E.const(_coef(rng)), prim(lin)))


def random_vector_field(n: int, rng: np.random.Generator, trig: bool = True) -> VectorField:
    return VectorField([random_function(n, rng, trig) for _ in range(n)])


def random_lift_function(algebra: WeilAlgebra, n: int, rng: np.random.Generator, size: int,
                         n_terms: int = 2) -> ALiftFunction:
    """sum_j a_j * (h_j)^A with a_j random in A (one per probe) and h_j random."""
    return ALiftFunction(algebra, [(algebra.random(rng, size), random_function(n, rng))
                                   for _ in range(n_terms)])


def random_a_field(algebra: WeilAlgebra, n: int, rng: np.random.Generator, size: int,
                   n_terms: int = 2) -> AVectorField:
    return AVectorField([random_lift_function(algebra, n, rng, size, n_terms) for _ in range(n)])


def random_invertible(algebra: WeilAlgebra, rng: np.random.Generator, size: int) -> AElement:
    """Coefficients in [-1, 1] with |real part| in [0.1, 1]."""
    c = rng.uniform(-1.0, 1.0, size=(algebra.dim, size))
    c[0] = rng.choice([-1.0, 1.0], size=size) * rng.uniform(0.1, 1.0, size=size)
    return AElement(algebra, c)


def random_nilpotent(algebra: WeilAlgebra, rng: np.random.Generator, size: int) -> AElement:
    c = rng.uniform(-1.0, 1.0, size=(algebra.dim, size))
    c[0] = 0.0
    return AElement(algebra, c)
