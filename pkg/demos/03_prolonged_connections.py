"""
Prolonging a connection to the Weil bundle
==========================================

Take the Levi-Civita connection of the round sphere chart and prolong it
over second order jets in two variables.  On lifted fields it reproduces
the lift of the base covariant derivative; on general A-fields it stays
torsion free.
"""
import numpy as np

from weilgeom import (VectorField, construct_algebra, covariant_derivative, lift_vector_field, nabla_A,
                      preset, torsion_A)
from weilgeom import expr as E
from weilgeom.sampling import near_point, random_a_field

geo = preset("sphere")
A = construct_algebra({"kind": "jet", "vars": 2, "order": 2})
rng = np.random.default_rng(7)
x1, x2 = E.variables(2)

print("Christoffel symbols:")
for k in range(2):
    for i in range(2):
        for j in range(i, 2):
            if not geo.connection[k, i, j].is_const(0.0):
                print(f"  G^{k + 1}_{i + 1}{j + 1} =", geo.connection[k, i, j])

theta = VectorField([x2, E.sin(x1)])
eta = VectorField([x1 * x2, E.const(1.0)])

xi = near_point(A, geo.chart, rng, 50)
lhs = nabla_A(geo.connection, lift_vector_field(theta, A), lift_vector_field(eta, A)).evaluate(xi)
rhs = lift_vector_field(covariant_derivative(geo.connection, theta, eta), A).evaluate(xi)
print("max deviation, prolonged vs lifted covariant derivative:", np.abs(lhs - rhs).max())

# fields that are not lifts: A-combinations of lifts with random coefficients
X, Y = random_a_field(A, 2, rng, 50), random_a_field(A, 2, rng, 50)
print("max |T^A(X, Y)| on random A-fields:", np.abs(torsion_A(geo.connection, X, Y).evaluate(xi)).max())

# a connection with torsion keeps it after prolongation
bad = geo.connection.perturbed(0, 0, 1, 1e-3)
print("perturbed connection, max |T^A(X, Y)|:", np.abs(torsion_A(bad, X, Y).evaluate(xi)).max())
