"""
Weil algebras as truncated polynomial rings
===========================================

Dual numbers, jets and hyper-duals all come from one constructor:
generators, a truncation degree and optionally some extra monomials set to zero.
"""
import numpy as np

from weilgeom import WeilAlgebra, construct_algebra, invert, tensor_product

# dual numbers R[e]/(e^2)
D = construct_algebra({"kind": "dual"})
eps = D.generator(1)
print(D, "basis:", [D.monomial_name(i) for i in range(D.dim)])
print("(1+2e)(3+e) =", (1 + 2 * eps) * (3 + eps))

# second order jets in one variable, t^3 = 0
J = construct_algebra({"kind": "jet", "vars": 1, "order": 2})
t = J.generator(1)
print("t * t^2 =", t * t * t)
print("1/(1+t) =", invert(1 + t))  # 1 - t + t^2

# the multiplication table, -1 marks an annihilated product
print(J.structure_constants)

# hyper-duals are the tensor square of the dual numbers
H = construct_algebra({"kind": "hyperdual", "vars": 2})
DD = tensor_product(D, D)
print("dual x dual == hyperdual table:", np.array_equal(DD.structure_constants, H.structure_constants))

# a custom quotient: two generators, degree <= 3, e1^2 = 0
C = WeilAlgebra(2, 3, zero_monomials=[(2, 0)])
print(C.dim, [C.monomial_name(i) for i in range(C.dim)])

# arithmetic is batched along trailing axes
u = H.random(np.random.default_rng(0), size=5)
u = u + 2.0  # keep the real part away from zero
print("max |u * u^-1 - 1| over 5 elements:", np.abs((u * invert(u)).coeffs - H.unit().coeffs[:, None]).max())
