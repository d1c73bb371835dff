import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from weilgeom import DomainError, diff, evaluate, parse, to_string
from weilgeom import expr as E
from weilgeom.expr import parse_guard

X = sp.symbols("x1:4")


def to_sympy(f):
    return sp.sympify(to_string(f).replace("^", "**"), locals={f"x{i + 1}": s for i, s in enumerate(X)})


x1, x2, x3 = E.variables(3)


def test_evaluate_examples():
    assert evaluate(x1 ** 2, [3.0]) == 9.0
    assert evaluate(E.sin(x1), [0.0]) == 0.0
    with pytest.raises(DomainError):
        evaluate(1 / x1, [0.0])
    with pytest.raises(DomainError):
        evaluate(E.log(x1), [-1.0])
    with pytest.raises(DomainError):
        evaluate(E.sqrt(x1), [-1.0])


def test_evaluate_vectorised():
    pts = np.array([[1.0, 2.0, 3.0], [0.5, 0.25, 2.0]])
    got = evaluate(x1 * E.exp(x2), pts)
    np.testing.assert_allclose(got, pts[0] * np.exp(pts[1]))


def test_diff_examples():
    assert diff(x1 ** 2, 0) == E.mul(E.const(2.0), x1)
    assert diff(E.sin(x1), 0) == E.cos(x1)
    assert diff(1 / x2, 0) == E.const(0.0)


def test_structural_equality():
    assert parse("x1*sin(x2)") == x1 * E.sin(x2)
    assert hash(parse("x1 + 2")) == hash(parse("x1+2"))
    assert parse("x1") != parse("x2")


def test_parse_errors():
    for bad in ("x1 +", "foo(x1)", "x0", "x1^1.5", "(x1", "x1 $ 2"):
        with pytest.raises(ValueError):
            parse(bad)


def test_guard():
    g = parse_guard("x2 > 0 and x1 < 3")
    assert evaluate(g[0], [0.0, 1.0]) > 0
    assert evaluate(g[1], [4.0, 1.0]) < 0


leaves = st.one_of(
    st.builds(E.Var, st.integers(0, 2)),
    st.builds(E.Const, st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 3))),
)


def _extend(children):
    return st.one_of(
        st.builds(E.Neg, children),
        st.builds(E.Add, children, children),
        st.builds(E.Sub, children, children),
        st.builds(E.Mul, children, children),
        st.builds(E.Div, children, children),
        st.builds(E.Pow, children, st.integers(-3, 4)),
        st.builds(E.Func, st.sampled_from(E.PRIMITIVES), children),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_print_parse_round_trip(f):
    assert parse(to_string(f)) == f


smooth_leaves = st.one_of(
    st.builds(E.Var, st.integers(0, 2)),
    st.builds(E.Const, st.floats(0.1, 2, allow_nan=False).map(lambda v: round(v, 2))),
)


def _smooth(children):
    # stays defined near the sample point: no division, logs and roots of 2 + sin
    pos = children.map(lambda c: E.add(E.const(2.0), E.sin(c)))
    return st.one_of(
        st.builds(E.add, children, children),
        st.builds(E.sub, children, children),
        st.builds(E.mul, children, children),
        st.builds(E.power, children, st.integers(0, 3)),
        st.builds(E.sin, children),
        st.builds(E.cos, children),
        st.builds(lambda c: E.exp(E.mul(E.const(0.3), c)), children),
        st.builds(E.log, pos),
        st.builds(E.sqrt, pos),
        st.builds(E.div, children, pos),
    )


smooth = st.recursive(smooth_leaves, _smooth, max_leaves=8)
POINT = [0.3, -0.4, 0.7]


@settings(max_examples=150, deadline=None)
@given(smooth, st.integers(0, 2))
def test_diff_matches_sympy(f, i):
    subs = dict(zip(X, POINT))
    want = float(sp.diff(to_sympy(f), X[i]).evalf(subs=subs))
    got = evaluate(diff(f, i), POINT)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(smooth, st.integers(0, 2))
def test_diff_matches_finite_difference(f, i):
    h = 1e-5
    up, dn = list(POINT), list(POINT)
    up[i] += h
    dn[i] -= h
    fd = (evaluate(f, up) - evaluate(f, dn)) / (2 * h)
    got = evaluate(diff(f, i), POINT)
    scale = max(1.0, abs(got), abs(evaluate(f, POINT)))
    assert abs(fd - got) <= 1e-6 * scale


@settings(max_examples=150, deadline=None)
@given(smooth)
def test_evaluate_matches_sympy(f):
    want = float(to_sympy(f).evalf(subs=dict(zip(X, POINT))))
    assert evaluate(f, POINT) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_folding():
    assert E.mul(E.const(0.0), x1) == E.const(0.0)
    assert E.add(x1, E.const(0.0)) == x1
    assert E.power(x1, 1) == x1
    with pytest.raises(DomainError):
        E.div(x1, E.const(0.0))
    assert math.isclose(evaluate(E.power(x1, -2), [2.0]), 0.25)
