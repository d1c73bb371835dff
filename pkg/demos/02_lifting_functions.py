"""
Lifting chart functions to A-valued functions
=============================================

A near point xi has coordinates in A.  Evaluating f at xi is a truncated
Taylor expansion in the nilpotent directions, which is how derivatives
appear as coefficients.
"""
import numpy as np

from weilgeom import APoint, construct_algebra, lift_eval, parse, taylor_oracle, a_partial, diff

f = parse("sin(x1) * exp(x2) + x1^2 * x2")
print("f =", f)

# hyper-duals at (x, y) + (e1, e2): the e1*e2 coefficient is the mixed partial
H = construct_algebra({"kind": "hyperdual", "vars": 2})
x, y = 0.4, -0.3
xi = APoint([x + H.generator(1), y + H.generator(2)])
val = lift_eval(f, xi)
print("f^A(xi) =", val)
print("d2f/dx dy by hand:", np.cos(x) * np.exp(y) + 2 * x)

# same thing through the symbolic Taylor formula, a separate code path
print("oracle  =", taylor_oracle(f, xi))

# third order jets give f, f', f''/2, f'''/6 of a single variable function
J = construct_algebra({"kind": "jet", "vars": 1, "order": 3})
g = parse("1/(2+cos(x1))")
print("jet of g at 0.8:", lift_eval(g, APoint([0.8 + J.generator(1)])).coeffs)

# partials along an A coordinate agree with the lift of the partial
J22 = construct_algebra({"kind": "jet", "vars": 2, "order": 2})
rng = np.random.default_rng(1)
xi = APoint([J22.element(rng.uniform(-1, 1, J22.dim)), J22.element(rng.uniform(-1, 1, J22.dim))])
print("max |d f^A/d xi_1 - (d_1 f)^A| =",
      np.abs(a_partial(f, xi, 0).coeffs - lift_eval(diff(f, 0), xi).coeffs).max())
