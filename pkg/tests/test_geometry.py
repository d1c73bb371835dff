import numpy as np
import pytest
import sympy as sp

from weilgeom import (Chart, ConfigError, Connection, DomainExhausted, Metric, SingularMetric, VectorField,
                      bracket, covariant_derivative, evaluate, geometry_from_descriptor, levi_civita,
                      nabla_g, preset, to_string, torsion)
from weilgeom import expr as E
from weilgeom.sampling import random_function, random_vector_field

X = sp.symbols("x1:3")
x1, x2 = E.variables(2)


def to_sympy(f):
    return sp.sympify(to_string(f).replace("^", "**"), locals={"x1": X[0], "x2": X[1]})


def sympy_christoffel(gmat):
    # independent oracle: textbook formula on a sympy Matrix
    n = gmat.shape[0]
    ginv = gmat.inv()
    return [[[sp.simplify(sum(ginv[k, l] * (sp.diff(gmat[j, l], X[i]) + sp.diff(gmat[i, l], X[j])
                                              - sp.diff(gmat[i, j], X[l])) for l in range(n)) / 2)
              for j in range(n)] for i in range(n)] for k in range(n)]


def vf_values(v, pts):
    return np.stack([np.broadcast_to(evaluate(c, pts), pts.shape[1:]) for c in v])


@pytest.mark.parametrize("name", ["euclid", "minkowski", "poincare", "sphere"])
def test_christoffel_against_sympy(name):
    geo = preset(name)
    gmat = sp.Matrix(2, 2, lambda i, j: to_sympy(geo.metric[i, j]))
    want = sympy_christoffel(gmat)
    pts = geo.chart.sample(np.random.default_rng(0), 25)
    for k in range(2):
        for i in range(2):
            for j in range(2):
                fn = sp.lambdify(X, want[k][i][j], "numpy")
                w = np.broadcast_to(fn(*pts), pts.shape[1:])
                got = np.broadcast_to(evaluate(geo.connection[k, i, j], pts), pts.shape[1:])
                np.testing.assert_allclose(got, w, atol=1e-12)


def test_christoffel_named_values():
    pc = preset("poincare").connection
    y = 1.7
    pt = [0.3, y]
    assert evaluate(pc[0, 0, 1], pt) == pytest.approx(-1 / y)
    assert evaluate(pc[0, 1, 0], pt) == pytest.approx(-1 / y)
    assert evaluate(pc[1, 0, 0], pt) == pytest.approx(1 / y)
    assert evaluate(pc[1, 1, 1], pt) == pytest.approx(-1 / y)
    assert evaluate(pc[0, 0, 0], pt) == 0
    sc = preset("sphere").connection
    t = 1.1
    assert evaluate(sc[0, 1, 1], [t, 0.0]) == pytest.approx(-np.sin(t) * np.cos(t))
    assert evaluate(sc[1, 0, 1], [t, 0.0]) == pytest.approx(np.cos(t) / np.sin(t))
    eu = preset("euclid", 3).connection
    assert all(eu[k, i, j].is_const(0.0) for k in range(3) for i in range(3) for j in range(3))


def test_covariant_derivative_examples():
    flat = Connection.flat(2)
    d1, d2 = VectorField.coordinate(0, 2), VectorField.coordinate(1, 2)
    got = covariant_derivative(flat, d1, x1 * d2)
    assert [evaluate(c, [0.4, 0.2]) for c in got] == [0.0, 1.0]
    const = VectorField([E.const(2.0), E.const(-1.0)])
    assert all(c.is_const(0.0) for c in covariant_derivative(flat, d1, const))
    hp = covariant_derivative(preset("poincare").connection, d1, d1)
    assert evaluate(hp[0], [0.1, 1.25]) == pytest.approx(0.0)
    assert evaluate(hp[1], [0.1, 1.25]) == pytest.approx(1 / 1.25)


def test_bracket_examples():
    d1, d2 = VectorField.coordinate(0, 2), VectorField.coordinate(1, 2)
    b = bracket(x1 * d2, d1)
    assert [evaluate(c, [0.3, 0.3]) for c in b] == [0.0, -1.0]
    th = VectorField([x1 * x2, E.sin(x1)])
    assert all(evaluate(c, [0.5, 0.5]) == 0 for c in bracket(th, th))
    assert all(c.is_const(0.0) for c in bracket(d1, d2))


def test_bracket_jacobi_and_skew():
    rng = np.random.default_rng(5)
    pts = Chart(2).sample(rng, 30)
    for _ in range(3):
        a, b, c = (random_vector_field(2, rng) for _ in range(3))
        jac = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
        assert np.abs(vf_values(jac, pts)).max() < 1e-9
        assert np.abs(vf_values(bracket(a, b) + bracket(b, a), pts)).max() < 1e-12


def test_torsion_examples():
    gam = [[["0", "1"], ["0", "0"]], [["0", "0"], ["0", "0"]]]
    conn = Connection(gam)
    assert not conn.is_symmetric()
    d1, d2 = VectorField.coordinate(0, 2), VectorField.coordinate(1, 2)
    assert [evaluate(c, [0.1, 0.2]) for c in torsion(conn, d1, d2)] == [1.0, 0.0]
    th = VectorField([x1, x2 ** 2])
    assert all(evaluate(c, [0.4, 0.6]) == 0 for c in torsion(conn, th, th))
    rng = np.random.default_rng(1)
    for name in ("poincare", "sphere"):
        geo = preset(name)
        pts = geo.chart.sample(rng, 100)
        th, et = random_vector_field(2, rng), random_vector_field(2, rng)
        assert np.abs(vf_values(torsion(geo.connection, th, et), pts)).max() < 1e-9


def test_leibniz_and_tensoriality():
    geo = preset("sphere")
    rng = np.random.default_rng(2)
    pts = geo.chart.sample(rng, 40)
    th, et = random_vector_field(2, rng), random_vector_field(2, rng)
    f = random_function(2, rng)
    lhs = covariant_derivative(geo.connection, th, f * et)
    rhs = th.apply(f) * et + f * covariant_derivative(geo.connection, th, et)
    assert np.abs(vf_values(lhs - rhs, pts)).max() < 1e-9
    lhs = covariant_derivative(geo.connection, f * th, et)
    rhs = f * covariant_derivative(geo.connection, th, et)
    assert np.abs(vf_values(lhs - rhs, pts)).max() < 1e-9


def test_nabla_g_examples():
    g = Metric([[1.0, 0.0], [0.0, x1 ** 2]])
    d1, d2 = VectorField.coordinate(0, 2), VectorField.coordinate(1, 2)
    val = nabla_g(Connection.flat(2), g, d1, d2, d2)
    assert evaluate(val, [0.7, 0.1]) == pytest.approx(1.4)
    const = Metric([[2.0, 0.5], [0.5, 1.0]])
    assert evaluate(nabla_g(Connection.flat(2), const, d1 + x2 * d2, x1 * d1, d2), [0.3, 0.2]) == 0
    rng = np.random.default_rng(3)
    for name in ("euclid", "minkowski", "poincare", "sphere"):
        geo = preset(name)
        pts = geo.chart.sample(rng, 100)
        vals = [random_vector_field(2, rng) for _ in range(3)]
        assert np.abs(evaluate(nabla_g(geo.connection, geo.metric, *vals), pts)).max() < 1e-9


def test_levi_civita_singular():
    g = Metric([["x1", 0], [0, 1]])
    with pytest.raises(SingularMetric):
        levi_civita(g, probe_points=np.array([[0.0, 1.0], [0.5, 0.5]]))


def test_chart_sampling():
    chart = preset("poincare").chart
    pts = chart.sample(np.random.default_rng(0), 500)
    assert pts.shape == (2, 500)
    assert np.all(pts[1] >= 0.5) and np.all(chart.contains(pts))
    empty = Chart(1, guard=(E.sub(E.power(x1, 2), E.const(100.0)),))
    with pytest.raises(DomainExhausted):
        empty.sample(np.random.default_rng(0), 5)


def test_metric_symmetry_required():
    with pytest.raises(ValueError):
        Metric([["1", "x1"], ["x2", "1"]])


def test_geometry_descriptors():
    geo = geometry_from_descriptor({"preset": "euclid", "dim": 3})
    assert geo.dim == 3 and geo.is_levi_civita
    geo = geometry_from_descriptor({"custom": {"dim": 2, "metric": [["1", "0"], ["0", "x1^2"]],
                                               "domain": "x1 > 0", "box": [[0.5, 2], [-1, 1]]}})
    assert geo.name == "custom"
    pert = geometry_from_descriptor({"preset": "poincare", "perturb": [{"index": [0, 0, 1], "delta": 1e-3}]})
    assert not pert.is_levi_civita
    assert evaluate(pert.connection[0, 0, 1], [0.0, 1.0]) == pytest.approx(-1 + 1e-3)
    for bad in ({"preset": "torus"}, {"preset": "euclid", "custom": {}}, {"preset": "poincare", "dim": 3},
                {"preset": "euclid", "christoffel": [[["0"]]]}, {"shape": "euclid"}):
        with pytest.raises(ConfigError):
            geometry_from_descriptor(bad)
