import numpy as np
import pytest

from weilgeom import (ALiftFunction, APoint, AVectorField, Metric, NonInvertible, VectorField, a_partial,
                      bracket, bracket_A, construct_algebra, covariant_derivative, decompose, gram_invert_A,
                      lift_eval, lift_function, lift_vector_field, metric_A, nabla_A, nabla_A_g, nabla_g,
                      preset, torsion, torsion_A)
from weilgeom import expr as E
from weilgeom.geometry import metric_pair
from weilgeom.prolong import gram_residual, reconstruct
from weilgeom.sampling import near_point, random_a_field, random_lift_function, random_vector_field

DUAL = construct_algebra({"kind": "dual"})
J22 = construct_algebra({"kind": "jet", "vars": 2, "order": 2})
x1, x2 = E.variables(2)


def close(a, b, atol=1e-9):
    # batch axes trail, so pad the lower-rank side on the right
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.ndim < b.ndim:
        a, b = b, a
    b = b.reshape(b.shape + (1,) * (a.ndim - b.ndim))
    return np.abs(a - b).max() <= atol


def test_lift_function_examples():
    xi = APoint([DUAL.element([1.5, -2.0])])
    assert lift_function(x1, DUAL)(xi).allclose(xi[0], atol=0)
    assert lift_function(E.const(1.0), DUAL)(xi).allclose(DUAL.unit(), atol=0)
    np.testing.assert_allclose(lift_function(x1 ** 2, DUAL)(xi).coeffs, [2.25, 2 * 1.5 * -2.0])


def test_vector_field_lift_examples():
    d1 = lift_vector_field(VectorField.coordinate(0, 3), J22)
    xi = near_point(J22, preset("euclid", 3).chart, np.random.default_rng(0), 4)
    vals = d1.evaluate(xi)
    assert np.all(vals[0, 0] == 1) and np.all(vals[0, 1:] == 0) and np.all(vals[1:] == 0)
    # x d/dx acting on x^2 over dual numbers gives 2 xi^2
    th = lift_vector_field(VectorField([x1]), DUAL)
    xi = APoint([DUAL.element([0.7, 0.3])])
    assert th(lift_function(x1 ** 2, DUAL))(xi).allclose(2 * xi[0] * xi[0], atol=1e-15)
    lhs = lift_vector_field(x1 * VectorField.coordinate(0, 1), DUAL)
    rhs = lift_function(x1, DUAL) * lift_vector_field(VectorField.coordinate(0, 1), DUAL)
    assert close(lhs.evaluate(xi), rhs.evaluate(xi), 0)


def test_frame_and_constants():
    xi = near_point(J22, preset("euclid").chart, np.random.default_rng(1), 5)
    for i in range(2):
        Di = AVectorField.frame(J22, i, 2)
        for j in range(2):
            v = Di(lift_function(E.variables(2)[j], J22))(xi)
            assert close(v.coeffs, (J22.unit() * float(i == j)).coeffs, 0)
        assert close(Di(ALiftFunction.constant(J22, J22.unit()))(xi).coeffs, 0, 0)


@pytest.mark.parametrize("desc", [{"kind": "dual"}, {"kind": "jet", "vars": 1, "order": 3},
                                  {"kind": "jet", "vars": 2, "order": 2}])
def test_field_action_against_shift_oracle(desc):
    A = construct_algebra(desc)
    rng = np.random.default_rng(4)
    chart = preset("sphere").chart
    X = random_a_field(A, 2, rng, 1)
    f = x1 * E.sin(x2) + E.exp(x1 * 0.5)
    xi = near_point(A, chart, rng, 1)
    got = X(lift_function(f, A))(xi)
    want = sum((X[i](xi) * a_partial(f, xi, i) for i in range(2)), A.zero())
    assert close(got.coeffs, want.coeffs, 1e-12)


def test_bracket_lift_and_bilinearity():
    rng = np.random.default_rng(6)
    chart = preset("poincare").chart
    th, et = random_vector_field(2, rng), random_vector_field(2, rng)
    xi = near_point(J22, chart, rng, 20)
    lhs = bracket_A(lift_vector_field(th, J22), lift_vector_field(et, J22))
    rhs = lift_vector_field(bracket(th, et), J22)
    assert close(lhs.evaluate(xi), rhs.evaluate(xi))
    X, Y = random_a_field(J22, 2, rng, 20), random_a_field(J22, 2, rng, 20)
    a = J22.random(rng, 20)
    assert close(bracket_A(a * X, Y).evaluate(xi), (a * bracket_A(X, Y)).evaluate(xi))
    assert close(bracket_A(X, X).evaluate(xi), 0, 1e-12)


def test_nabla_A_euclid_example():
    d1 = AVectorField.frame(J22, 0, 2)
    Y = lift_function(x1 ** 2, J22) * d1
    got = nabla_A(preset("euclid").connection, d1, Y)
    xi = near_point(J22, preset("euclid").chart, np.random.default_rng(2), 10)
    explicit = AVectorField([lift_function(x1 ** 2, J22), ALiftFunction.zero(J22)])
    assert close(Y.evaluate(xi), explicit.evaluate(xi), 0)
    want = AVectorField([lift_function(2 * x1, J22), ALiftFunction.zero(J22)])
    assert close(got.evaluate(xi), want.evaluate(xi), 1e-13)


@pytest.mark.parametrize("name", ["euclid", "minkowski", "poincare", "sphere"])
def test_prolonged_connection(name):
    geo = preset(name)
    rng = np.random.default_rng(8)
    th, et = random_vector_field(2, rng), random_vector_field(2, rng)
    xi = near_point(J22, geo.chart, rng, 30)
    lhs = nabla_A(geo.connection, lift_vector_field(th, J22), lift_vector_field(et, J22))
    assert close(lhs.evaluate(xi), lift_vector_field(covariant_derivative(geo.connection, th, et), J22).evaluate(xi))
    X, Y, Z = (random_a_field(J22, 2, rng, 30) for _ in range(3))
    phi = random_lift_function(J22, 2, rng, 30)
    lhs = nabla_A(geo.connection, X, phi * Y)
    rhs = X(phi) * Y + phi * nabla_A(geo.connection, X, Y)
    assert close(lhs.evaluate(xi), rhs.evaluate(xi))
    assert close(torsion_A(geo.connection, X, Y).evaluate(xi), 0)
    assert close(nabla_A_g(geo.connection, geo.metric, X, Y, Z)(xi).coeffs, 0)


def test_torsionful_control():
    conn = preset("euclid").connection.perturbed(0, 0, 1, 1.0)
    d1, d2 = VectorField.coordinate(0, 2), VectorField.coordinate(1, 2)
    rng = np.random.default_rng(9)
    xi = near_point(J22, preset("euclid").chart, rng, 10)
    T = torsion_A(conn, lift_vector_field(d1, J22), lift_vector_field(d2, J22)).evaluate(xi)
    assert close(T, lift_vector_field(torsion(conn, d1, d2), J22).evaluate(xi), 0)
    assert np.all(T[0, 0] == 1)
    X, Y = random_a_field(J22, 2, rng, 10), random_a_field(J22, 2, rng, 10)
    phi = random_lift_function(J22, 2, rng, 10)
    assert close(torsion_A(conn, X, phi * Y).evaluate(xi), (phi * torsion_A(conn, X, Y)).evaluate(xi))


def test_metric_lift_and_scaled_lift():
    geo = preset("sphere")
    rng = np.random.default_rng(10)
    th, et = random_vector_field(2, rng), random_vector_field(2, rng)
    xi = near_point(J22, geo.chart, rng, 25)
    thA, etA = lift_vector_field(th, J22), lift_vector_field(et, J22)
    base = lift_function(metric_pair(geo.metric, et, th), J22)
    assert close(metric_A(geo.metric, etA, thA)(xi).coeffs, base(xi).coeffs)
    a, b = J22.random(rng, 25), J22.random(rng, 25)
    assert close(metric_A(geo.metric, a * etA, b * thA)(xi).coeffs, (a * b * base(xi)).coeffs)
    d1 = AVectorField.frame(J22, 0, 2)
    val = metric_A(preset("minkowski").metric, d1, d1)(xi)
    assert close(val.coeffs, J22.constant(-1.0).coeffs, 0)
    mu1, mu2 = random_vector_field(2, rng), random_vector_field(2, rng)
    lhs = nabla_A_g(geo.connection, geo.metric, thA, lift_vector_field(mu1, J22), lift_vector_field(mu2, J22))
    rhs = lift_function(nabla_g(geo.connection, geo.metric, th, mu1, mu2), J22)
    assert close(lhs(xi).coeffs, rhs(xi).coeffs)


def test_gram_inverse():
    xi = near_point(J22, preset("minkowski").chart, np.random.default_rng(0), 3)
    inv = gram_invert_A(preset("minkowski").metric, xi)
    assert close(inv[0][0].coeffs, J22.constant(-1.0).coeffs, 0)
    assert close(inv[1][1].coeffs, J22.constant(1.0).coeffs, 0)
    assert close(inv[0][1].coeffs, 0, 0)
    # half-plane at augment(y) = 1 with nonzero nilpotent parts
    y = J22.element([1.0, 0.4, -0.3, 0.2, 0.1, -0.5])
    xi = APoint([J22.element([0.2, 0.5, 0.5, 0.1, 0.0, 0.3]), y])
    assert gram_residual(preset("poincare").metric, xi) <= 1e-12
    g = Metric([["x1", "0"], ["0", "1"]])
    with pytest.raises(NonInvertible):
        gram_invert_A(g, APoint([J22.generator(1), J22.constant(0.5)]))


def test_gram_inverse_oracle_sphere():
    # independent check: G^-1 over A equals the lift of the symbolic inverse metric
    geo = preset("sphere")
    xi = near_point(J22, geo.chart, np.random.default_rng(3), 20)
    inv = gram_invert_A(geo.metric, xi)
    sym = geo.metric.inverse()
    for i in range(2):
        for j in range(2):
            assert close(inv[i][j].coeffs, lift_eval(E.as_expr(sym[i][j]), xi).coeffs, 1e-10)


def test_decompose():
    xi = APoint([DUAL.element([1.2, 0.5])])
    pairs = decompose(lift_function(x1 ** 2, DUAL), xi)
    assert pairs[0][0].allclose(DUAL.unit(), atol=0) and pairs[1][0].allclose(DUAL.generator(1), atol=0)
    assert pairs[0][1] == pytest.approx(1.44) and pairs[1][1] == pytest.approx(1.2)
    one = decompose(ALiftFunction.constant(DUAL, 1.0), xi)
    assert one[0][1] == 1 and one[1][1] == 0
    rng = np.random.default_rng(12)
    phi = random_lift_function(J22, 2, rng, 15)
    xi = near_point(J22, preset("euclid").chart, rng, 15)
    assert reconstruct(decompose(phi, xi)).allclose(phi(xi), atol=1e-13)
    basis = [J22.unit()] + [J22.basis_element(a) + 0.5 * J22.basis_element(a - 1) for a in range(1, J22.dim)]
    assert reconstruct(decompose(phi, xi, basis)).allclose(phi(xi), atol=1e-12)
