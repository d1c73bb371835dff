"""Randomized property suites over an (algebra, geometry) pair.

Every invariant of the library is one named check.  A check draws its own
seeded random probes, returns the maximum absolute deviation it observed,
and passes iff that deviation is within its threshold (0 for exact checks).
Checks can be flagged as expected failures to run negative controls.
"""
from __future__ import annotations

import json
import math
import os
import re
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from . import expr as E
from .algebra import WeilAlgebra, construct_algebra, invert, zero_tolerance, DEFAULT_ZERO_TOL
from .calculus import APoint, a_partial, lift_eval, taylor_oracle
from .errors import ConfigError, NonInvertible, SingularMetric, WeilError
from .geometry import (Chart, Connection, Geometry, Metric, VectorField, bracket, covariant_derivative,
                       geometry_from_descriptor, metric_pair, nabla_g, torsion)
from .prolong import (ALiftFunction, AVectorField, apply_vector_field, bracket_A, decompose,
                      gram_invert_A, gram_residual, lift_function, lift_vector_field, metric_A,
                      nabla_A, nabla_A_g, reconstruct, torsion_A)
from . import sampling as S

__all__ = ["SuiteConfig", "SuiteReport", "CheckResult", "CHECKS", "SUITES", "parse_config",
           "run_suites", "parse_algebra_arg", "parse_geometry_arg", "DEFAULT_SEED"]

SUITES = ("algebra", "lift", "bracket", "connection", "torsion", "metric")
DEFAULT_SEED = 42
BATCH = 20


# -- configuration --------------------------------------------------------

@dataclass
class SuiteConfig:
    algebra: dict
    geometry: dict
    suites: tuple = SUITES
    samples: int = 100
    tol: float = 1e-9
    seed: int = DEFAULT_SEED
    report: str = "text"
    expect_fail: tuple = ()
    zero_tol: float = DEFAULT_ZERO_TOL

    def to_dict(self) -> dict:
        return {"algebra": self.algebra, "geometry": self.geometry, "suites": list(self.suites),
                "samples": self.samples, "tol": self.tol, "seed": self.seed,
                "report": self.report, "expect_fail": list(self.expect_fail),
                "zero_tol": self.zero_tol}


_CONFIG_FIELDS = {"algebra", "geometry", "suites", "samples", "tol", "seed", "report",
                  "expect_fail", "zero_tol"}


def _load_json(source):
    if isinstance(source, dict):
        return dict(source), "<dict>"
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {str(path)!r}: {exc.strerror}") from exc
        where = str(path)
    else:
        text, where = source, "<inline>"
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: top level must be a JSON object")
    return data, where


def _int_field(data, key, minimum):
    v = data[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ConfigError(f"field {key!r} must be an integer >= {minimum}, got {v!r}")
    return v


def _float_field(data, key):
    v = data[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0 or not math.isfinite(v):
        raise ConfigError(f"field {key!r} must be a positive number, got {v!r}")
    return float(v)


def parse_config(source, overrides: dict | None = None) -> SuiteConfig:
    """Resolve a config (file path, inline JSON text or dict) with defaults applied.

    ``overrides`` replaces top-level fields before validation.  The seed falls
    back to ``$WEILGEOM_SEED`` and then to 42.
    """
    data, where = _load_json(source) if source is not None else ({}, "<overrides>")
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    for key in ("algebra", "geometry"):
        if key not in data:
            raise ConfigError(f"{where}: missing required field {key!r}")

    try:
        construct_algebra(data["algebra"])
    except ConfigError as exc:
        raise ConfigError(f"{where}: field 'algebra': {exc}") from exc
    try:
        geometry_from_descriptor(data["geometry"])
    except ConfigError as exc:
        raise ConfigError(f"{where}: field 'geometry': {exc}") from exc
    except SingularMetric as exc:
        raise ConfigError(f"{where}: field 'geometry': {exc}") from exc

    suites = data.get("suites", ["all"])
    if isinstance(suites, str):
        suites = [suites]
    if not isinstance(suites, list) or not suites:
        raise ConfigError(f"{where}: field 'suites' must be a non-empty list")
    resolved = []
    for s in suites:
        if s == "all":
            resolved.extend(SUITES)
        elif s in SUITES:
            resolved.append(s)
        else:
            raise ConfigError(f"{where}: field 'suites': unknown suite {s!r}")
    resolved = tuple(s for s in SUITES if s in resolved)

    samples = _int_field(data, "samples", 1) if "samples" in data else 100
    tol = _float_field(data, "tol") if "tol" in data else 1e-9
    zero_tol = _float_field(data, "zero_tol") if "zero_tol" in data else DEFAULT_ZERO_TOL
    if "seed" in data:
        seed = _int_field(data, "seed", 0)
    elif os.environ.get("WEILGEOM_SEED"):
        try:
            seed = int(os.environ["WEILGEOM_SEED"])
        except ValueError as exc:
            raise ConfigError(f"WEILGEOM_SEED must be an integer, got {os.environ['WEILGEOM_SEED']!r}") from exc
        if seed < 0:
            raise ConfigError("WEILGEOM_SEED must be non-negative")
    else:
        seed = DEFAULT_SEED
    report = data.get("report", "text")
    if report not in ("text", "json"):
        raise ConfigError(f"{where}: field 'report' must be 'text' or 'json', got {report!r}")
    expect_fail = data.get("expect_fail", [])
    if not isinstance(expect_fail, list) or any(n not in _CHECK_NAMES for n in expect_fail):
        bad = [n for n in expect_fail if n not in _CHECK_NAMES] if isinstance(expect_fail, list) else expect_fail
        raise ConfigError(f"{where}: field 'expect_fail': unknown check name(s) {bad!r}")
    return SuiteConfig(algebra=data["algebra"], geometry=data["geometry"], suites=resolved,
                       samples=samples, tol=tol, seed=seed, report=report,
                       expect_fail=tuple(expect_fail), zero_tol=zero_tol)


_SHORT = re.compile(r"^\s*([a-z]+)\s*(?:\(\s*([\d\s,]*)\))?\s*$")


def parse_algebra_arg(text: str) -> dict:
    """JSON text or shorthand: dual, real, jet(r,k), hyperdual(r), joined by '*' for tensors."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--algebra: {exc.msg} at column {exc.colno}") from exc
    factors = []
    for part in text.split("*"):
        m = _SHORT.match(part)
        if not m:
            raise ConfigError(f"--algebra: cannot read {part.strip()!r}")
        name, args = m.group(1), [int(a) for a in (m.group(2) or "").replace(" ", "").split(",") if a]
        if name in ("dual", "real") and not args:
            factors.append({"kind": name})
        elif name == "jet" and len(args) == 2:
            factors.append({"kind": "jet", "vars": args[0], "order": args[1]})
        elif name == "hyperdual" and len(args) == 1:
            factors.append({"kind": "hyperdual", "vars": args[0]})
        else:
            raise ConfigError(f"--algebra: cannot read {part.strip()!r}")
    return factors[0] if len(factors) == 1 else {"kind": "tensor", "factors": factors}


def parse_geometry_arg(text: str) -> dict:
    """JSON text or shorthand: euclid, minkowski(3), poincare, sphere."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--geometry: {exc.msg} at column {exc.colno}") from exc
    m = _SHORT.match(text)
    if not m:
        raise ConfigError(f"--geometry: cannot read {text!r}")
    desc = {"preset": m.group(1)}
    if m.group(2):
        desc["dim"] = int(m.group(2))
    return desc


# -- check machinery ------------------------------------------------------

@dataclass
class Check:
    name: str
    suite: str
    anchor: str
    fn: Callable
    exact: bool = False
    threshold: float | None = None


@dataclass
class CheckResult:
    name: str
    suite: str
    anchor: str
    samples: int
    max_dev: float | None
    tol: float
    passed: bool
    expect: str
    error: str | None = None

    @property
    def as_expected(self) -> bool:
        return self.passed == (self.expect == "pass")

    def to_dict(self) -> dict:
        d = {"name": self.name, "suite": self.suite, "anchor": self.anchor, "samples": self.samples,
             "max_dev": self.max_dev, "tol": self.tol, "pass": self.passed, "expect": self.expect}
        if self.error:
            d["error"] = self.error
        return d


@dataclass
class SuiteReport:
    env: dict
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.as_expected for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def __getitem__(self, name) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"env": self.env, "checks": [c.to_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def to_text(self) -> str:
        e = self.env
        lines = [f"weilgeom {e['version']}  algebra dim={e['algebra_dim']} "
                 f"{json.dumps(e['algebra'])}  geometry={e['preset']}  seed={e['seed']}  "
                 f"samples={e['samples']}"]
        width = max((len(c.name) for c in self.checks), default=10)
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            if c.expect == "fail":
                status += " (expected fail)" if not c.passed else " (UNEXPECTED PASS)"
            dev = "error" if c.max_dev is None else f"{c.max_dev:.3e}"
            lines.append(f"{status:<24} {c.name:<{width}}  max_dev={dev:<10} tol={c.tol:.0e}  {c.anchor}"
                         + (f"  [{c.error}]" if c.error else ""))
        n_ok = sum(c.as_expected for c in self.checks)
        lines.append(f"{n_ok}/{len(self.checks)} checks as expected")
        return "\n".join(lines)


class _Ctx:
    def __init__(self, algebra: WeilAlgebra, geom: Geometry, samples: int, rng: np.random.Generator):
        self.A = algebra
        self.geom = geom
        self.n = geom.dim
        self.samples = samples
        self.rng = rng

    def batches(self):
        left = self.samples
        while left > 0:
            size = min(BATCH, left)
            left -= size
            yield size

    def point(self, size) -> APoint:
        return S.near_point(self.A, self.geom.chart, self.rng, size)

    def base(self, size):
        return tuple(self.geom.chart.sample(self.rng, size))

    def func(self, rich=False):
        f = S.random_function(self.n, self.rng)
        if rich:
            f = E.add(f, _rich_term(self.n, self.rng))
        return f

    def vf(self) -> VectorField:
        return S.random_vector_field(self.n, self.rng)

    def phi(self, size) -> ALiftFunction:
        return S.random_lift_function(self.A, self.n, self.rng, size)

    def field(self, size) -> AVectorField:
        return S.random_a_field(self.A, self.n, self.rng, size)

    def aelem(self, size):
        return self.A.random(self.rng, size)


def _rich_term(n, rng):
    """A term exercising division, log and sqrt, defined on all of R^n."""
    x = E.variables(n)[int(rng.integers(n))]
    inner = E.add(E.const(2.0), E.sin(x))
    kind = int(rng.integers(3))
    if kind == 0:
        return E.div(E.const(1.0), inner)
    if kind == 1:
        return E.log(inner)
    return E.sqrt(inner)


def _dev(a, b) -> float:
    a = a.coeffs if hasattr(a, "coeffs") else np.asarray(a)
    b = b.coeffs if hasattr(b, "coeffs") else np.asarray(b)
    # batch axes trail, so pad the lower-rank side on the right
    if a.ndim < b.ndim:
        a = a.reshape(a.shape + (1,) * (b.ndim - a.ndim))
    elif b.ndim < a.ndim:
        b = b.reshape(b.shape + (1,) * (a.ndim - b.ndim))
    return float(np.max(np.abs(a - b))) if np.size(a) or np.size(b) else 0.0


def _fdev(X: AVectorField, Y: AVectorField, xi: APoint) -> float:
    cache: dict = {}
    return _dev(X.evaluate(xi, cache), Y.evaluate(xi, cache))


def _ldev(phi: ALiftFunction, psi: ALiftFunction, xi: APoint) -> float:
    cache: dict = {}
    return _dev(phi.evaluate(xi, cache), psi.evaluate(xi, cache))


def _maxloop(ctx, body) -> float:
    return max(body(size) for size in ctx.batches())


# -- algebra suite ----------------------------------------------------------

def _alg_commutative(ctx):
    return float(ctx.A.commutativity_violations())


def _alg_associative(ctx):
    return float(ctx.A.associativity_violations())


def _alg_ring_laws(ctx):
    def body(size):
        u, v, w = (ctx.aelem(size) for _ in range(3))
        return max(_dev(u * v, v * u), _dev((u * v) * w, u * (v * w)),
                   _dev(u * (v + w), u * v + u * w))
    return _maxloop(ctx, body)


def _alg_augmentation(ctx):
    def body(size):
        u, v = ctx.aelem(size), ctx.aelem(size)
        lam = ctx.rng.uniform(-1, 1, size)
        return max(_dev((u * v).augment(), u.augment() * v.augment()),
                   _dev((u * lam + v).augment(), u.augment() * lam + v.augment()))
    return _maxloop(ctx, body)


def _alg_inverse(ctx):
    def body(size):
        u = S.random_invertible(ctx.A, ctx.rng, size)
        return _dev(u * invert(u), ctx.A.constant(np.ones(size)))
    return _maxloop(ctx, body)


def _alg_nilpotency(ctx):
    def body(size):
        u = S.random_nilpotent(ctx.A, ctx.rng, size)
        return float(np.max(np.abs((u ** (ctx.A.truncation_order + 1)).coeffs)))
    return _maxloop(ctx, body)


def _alg_components(ctx):
    def body(size):
        u = ctx.aelem(size)
        return _dev(reconstruct(decompose(u, None)), u)
    return _maxloop(ctx, body)


# -- lift suite -------------------------------------------------------------

def _lift_additive(ctx):
    def body(size):
        f, g, xi = ctx.func(True), ctx.func(True), ctx.point(size)
        return _dev(lift_eval(E.add(f, g), xi), lift_eval(f, xi) + lift_eval(g, xi))
    return _maxloop(ctx, body)


def _lift_homogeneous(ctx):
    def body(size):
        f, xi = ctx.func(True), ctx.point(size)
        lam = float(ctx.rng.uniform(-2, 2))
        return _dev(lift_eval(E.mul(lam, f), xi), lift_eval(f, xi) * lam)
    return _maxloop(ctx, body)


def _lift_multiplicative(ctx):
    def body(size):
        f, g, xi = ctx.func(True), ctx.func(True), ctx.point(size)
        return _dev(lift_eval(E.mul(f, g), xi), lift_eval(f, xi) * lift_eval(g, xi))
    return _maxloop(ctx, body)


def _lift_coordinate(ctx):
    def body(size):
        xi = ctx.point(size)
        return max(_dev(lift_eval(E.var(j), xi), xi[j]) for j in range(ctx.n))
    return _maxloop(ctx, body)


def _lift_augmentation(ctx):
    def body(size):
        f, xi = ctx.func(True), ctx.point(size)
        return _dev(lift_eval(f, xi).augment(), E.evaluate(f, xi.base_point()))
    return _maxloop(ctx, body)


def _lift_taylor(ctx):
    def body(size):
        f, xi = ctx.func(True), ctx.point(size)
        return _dev(lift_eval(f, xi), taylor_oracle(f, xi))
    return _maxloop(ctx, body)


def _lift_partials(ctx):
    def body(size):
        f, xi = ctx.func(True), ctx.point(size)
        return max(_dev(lift_eval(E.diff(f, i), xi), a_partial(f, xi, i)) for i in range(ctx.n))
    return _maxloop(ctx, body)


def _lift_decompose(ctx):
    def body(size):
        phi, xi = ctx.phi(size), ctx.point(size)
        val = phi.evaluate(xi)
        basis = [S.random_invertible(ctx.A, ctx.rng, 1) for _ in range(ctx.A.dim)]
        basis = [ctx.A.element(b.coeffs[:, 0]) for b in basis]
        return max(_dev(reconstruct(decompose(phi, xi)), val),
                   _dev(reconstruct(decompose(phi, xi, basis)), val))
    return _maxloop(ctx, body)


def _lift_frame(ctx):
    def body(size):
        xi = ctx.point(size)
        worst = 0.0
        for i in range(ctx.n):
            X = AVectorField.frame(ctx.A, i, ctx.n)
            for j in range(ctx.n):
                val = X(lift_function(E.var(j), ctx.A)).evaluate(xi)
                worst = max(worst, _dev(val, ctx.A.constant(float(i == j))))
        return worst
    return _maxloop(ctx, body)


def _lift_vf_action(ctx):
    def body(size):
        theta, f, xi = ctx.vf(), ctx.func(True), ctx.point(size)
        lhs = apply_vector_field(lift_vector_field(theta, ctx.A), lift_function(f, ctx.A))
        return _ldev(lhs, lift_function(theta.apply(f), ctx.A), xi)
    return _maxloop(ctx, body)


def _lift_vf_additive(ctx):
    def body(size):
        t1, t2, phi, xi = ctx.vf(), ctx.vf(), ctx.phi(size), ctx.point(size)
        lhs = lift_vector_field(t1 + t2, ctx.A)(phi)
        rhs = lift_vector_field(t1, ctx.A)(phi) + lift_vector_field(t2, ctx.A)(phi)
        return _ldev(lhs, rhs, xi)
    return _maxloop(ctx, body)


def _lift_vf_module(ctx):
    def body(size):
        theta, f, phi, xi = ctx.vf(), ctx.func(), ctx.phi(size), ctx.point(size)
        lhs = lift_vector_field(f * theta, ctx.A)(phi)
        rhs = lift_function(f, ctx.A) * lift_vector_field(theta, ctx.A)(phi)
        return _ldev(lhs, rhs, xi)
    return _maxloop(ctx, body)


def _lift_leibniz(ctx):
    def body(size):
        X, phi, psi, a, xi = ctx.field(size), ctx.phi(size), ctx.phi(size), ctx.aelem(size), ctx.point(size)
        return max(_ldev(X(phi * psi), X(phi) * psi + phi * X(psi), xi),
                   _ldev(X(phi * a), X(phi) * a, xi),
                   _ldev(X(ALiftFunction.constant(ctx.A, a)), ALiftFunction.zero(ctx.A), xi))
    return _maxloop(ctx, body)


# -- bracket suite ----------------------------------------------------------

def _br_base(ctx):
    def body(size):
        a, b, c = ctx.vf(), ctx.vf(), ctx.vf()
        p = ctx.base(size)
        skew = bracket(a, b) + bracket(b, a)
        jac = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
        return max(float(np.max(np.abs(skew.evaluate(p)))), float(np.max(np.abs(jac.evaluate(p)))))
    return _maxloop(ctx, body)


def _br_lift(ctx):
    def body(size):
        t1, t2, xi = ctx.vf(), ctx.vf(), ctx.point(size)
        lhs = lift_vector_field(bracket(t1, t2), ctx.A)
        rhs = bracket_A(lift_vector_field(t1, ctx.A), lift_vector_field(t2, ctx.A))
        return _fdev(lhs, rhs, xi)
    return _maxloop(ctx, body)


def _br_skew(ctx):
    def body(size):
        X, Y, xi = ctx.field(size), ctx.field(size), ctx.point(size)
        zero = AVectorField([ALiftFunction.zero(ctx.A)] * ctx.n)
        return max(_fdev(bracket_A(X, Y), -bracket_A(Y, X), xi), _fdev(bracket_A(X, X), zero, xi))
    return _maxloop(ctx, body)


def _br_bilinear(ctx):
    def body(size):
        X1, X2, Y = ctx.field(size), ctx.field(size), ctx.field(size)
        a, xi = ctx.aelem(size), ctx.point(size)
        return max(_fdev(bracket_A(a * X1, Y), a * bracket_A(X1, Y), xi),
                   _fdev(bracket_A(X1 + X2, Y), bracket_A(X1, Y) + bracket_A(X2, Y), xi))
    return _maxloop(ctx, body)


def _br_jacobi(ctx):
    def body(size):
        X, Y, Z, xi = ctx.field(size), ctx.field(size), ctx.field(size), ctx.point(size)
        cyc = bracket_A(X, bracket_A(Y, Z)) + bracket_A(Y, bracket_A(Z, X)) + bracket_A(Z, bracket_A(X, Y))
        return float(np.max(np.abs(cyc.evaluate(xi))))
    return _maxloop(ctx, body)


# -- connection suite -------------------------------------------------------

def _conn_base_leibniz(ctx):
    conn = ctx.geom.connection

    def body(size):
        theta, eta, f, p = ctx.vf(), ctx.vf(), ctx.func(), ctx.base(size)
        lhs = covariant_derivative(conn, theta, f * eta)
        rhs = theta.apply(f) * eta + f * covariant_derivative(conn, theta, eta)
        return float(np.max(np.abs((lhs - rhs).evaluate(p))))
    return _maxloop(ctx, body)


def _conn_lift(ctx):
    conn = ctx.geom.connection

    def body(size):
        theta, eta, xi = ctx.vf(), ctx.vf(), ctx.point(size)
        lhs = nabla_A(conn, lift_vector_field(theta, ctx.A), lift_vector_field(eta, ctx.A))
        return _fdev(lhs, lift_vector_field(covariant_derivative(conn, theta, eta), ctx.A), xi)
    return _maxloop(ctx, body)


def _conn_leibniz(ctx):
    conn = ctx.geom.connection

    def body(size):
        X, Y, phi, a, xi = ctx.field(size), ctx.field(size), ctx.phi(size), ctx.aelem(size), ctx.point(size)
        lhs = nabla_A(conn, X, phi * Y)
        rhs = X(phi) * Y + phi * nabla_A(conn, X, Y)
        return max(_fdev(lhs, rhs, xi), _fdev(nabla_A(conn, X, a * Y), a * nabla_A(conn, X, Y), xi))
    return _maxloop(ctx, body)


def _conn_linear(ctx):
    conn = ctx.geom.connection

    def body(size):
        X, Y, Z, phi, xi = ctx.field(size), ctx.field(size), ctx.field(size), ctx.phi(size), ctx.point(size)
        lhs = nabla_A(conn, phi * X + Y, Z)
        rhs = phi * nabla_A(conn, X, Z) + nabla_A(conn, Y, Z)
        return _fdev(lhs, rhs, xi)
    return _maxloop(ctx, body)


# -- torsion suite ----------------------------------------------------------

def _tor_base_symmetric(ctx):
    conn, n = ctx.geom.connection, ctx.n

    def body(size):
        p = ctx.base(size)
        worst = 0.0
        for i in range(n):
            for j in range(n):
                T = torsion(conn, VectorField.coordinate(i, n), VectorField.coordinate(j, n))
                worst = max(worst, float(np.max(np.abs(T.evaluate(p)))))
        return worst
    return _maxloop(ctx, body)


def _tor_base_tensorial(ctx):
    conn = ctx.geom.connection

    def body(size):
        theta, eta, f, p = ctx.vf(), ctx.vf(), ctx.func(), ctx.base(size)
        d1 = torsion(conn, f * theta, eta) - f * torsion(conn, theta, eta)
        d2 = torsion(conn, theta, eta) + torsion(conn, eta, theta)
        return max(float(np.max(np.abs(d1.evaluate(p)))), float(np.max(np.abs(d2.evaluate(p)))))
    return _maxloop(ctx, body)


def _torsion_lift_with(ctx, conn):
    def body(size):
        theta, eta, xi = ctx.vf(), ctx.vf(), ctx.point(size)
        lhs = torsion_A(conn, lift_vector_field(theta, ctx.A), lift_vector_field(eta, ctx.A))
        return _fdev(lhs, lift_vector_field(torsion(conn, theta, eta), ctx.A), xi)
    return _maxloop(ctx, body)


def _tor_lift(ctx):
    return _torsion_lift_with(ctx, ctx.geom.connection)


def torsionful_control(n: int) -> Connection:
    """Flat connection plus gamma^1_12 = 1 (gamma^1_11 = 1 in dimension one)."""
    g = [[[E.const(0.0)] * n for _ in range(n)] for _ in range(n)]
    g[0][0][min(1, n - 1)] = E.const(1.0)
    return Connection(g)


def _tor_control(ctx):
    return _torsion_lift_with(ctx, torsionful_control(ctx.n))


def _tor_skew(ctx):
    conn = ctx.geom.connection

    def body(size):
        X, Y, xi = ctx.field(size), ctx.field(size), ctx.point(size)
        zero = AVectorField([ALiftFunction.zero(ctx.A)] * ctx.n)
        return max(_fdev(torsion_A(conn, X, Y), -torsion_A(conn, Y, X), xi),
                   _fdev(torsion_A(conn, X, X), zero, xi))
    return _maxloop(ctx, body)


def _tor_tensorial(ctx):
    conn = ctx.geom.connection

    def body(size):
        X, Y, Y2, phi, xi = ctx.field(size), ctx.field(size), ctx.field(size), ctx.phi(size), ctx.point(size)
        return max(_fdev(torsion_A(conn, X, phi * Y), phi * torsion_A(conn, X, Y), xi),
                   _fdev(torsion_A(conn, X, Y + Y2), torsion_A(conn, X, Y) + torsion_A(conn, X, Y2), xi))
    return _maxloop(ctx, body)


def _tor_free(ctx):
    conn = ctx.geom.connection

    def body(size):
        X, Y, xi = ctx.field(size), ctx.field(size), ctx.point(size)
        return float(np.max(np.abs(torsion_A(conn, X, Y).evaluate(xi))))
    return _maxloop(ctx, body)


# -- metric suite -----------------------------------------------------------

def _met_base_compatible(ctx):
    conn, g = ctx.geom.connection, ctx.geom.metric

    def body(size):
        theta, m1, m2, p = ctx.vf(), ctx.vf(), ctx.vf(), ctx.base(size)
        return float(np.max(np.abs(E.evaluate(nabla_g(conn, g, theta, m1, m2), p))))
    return _maxloop(ctx, body)


def _met_lift(ctx):
    g = ctx.geom.metric

    def body(size):
        eta, theta, xi = ctx.vf(), ctx.vf(), ctx.point(size)
        lhs = metric_A(g, lift_vector_field(eta, ctx.A), lift_vector_field(theta, ctx.A))
        return _ldev(lhs, lift_function(metric_pair(g, eta, theta), ctx.A), xi)
    return _maxloop(ctx, body)


def _met_scaled_lift(ctx):
    g = ctx.geom.metric

    def body(size):
        eta, theta, a, b, xi = ctx.vf(), ctx.vf(), ctx.aelem(size), ctx.aelem(size), ctx.point(size)
        lhs = metric_A(g, a * lift_vector_field(eta, ctx.A), b * lift_vector_field(theta, ctx.A))
        return _ldev(lhs, lift_function(metric_pair(g, eta, theta), ctx.A) * (a * b), xi)
    return _maxloop(ctx, body)


def _met_bilinear(ctx):
    g = ctx.geom.metric

    def body(size):
        X, Y, phi, xi = ctx.field(size), ctx.field(size), ctx.phi(size), ctx.point(size)
        return max(_ldev(metric_A(g, X, Y), metric_A(g, Y, X), xi),
                   _ldev(metric_A(g, phi * X, Y), phi * metric_A(g, X, Y), xi))
    return _maxloop(ctx, body)


def _met_nondegenerate(ctx):
    g = ctx.geom.metric

    def body(size):
        return gram_residual(g, ctx.point(size))
    return _maxloop(ctx, body)


DEGENERATE_CONTROL = ("x1", "1")


def _met_degenerate_control(ctx):
    """diag(x1, 1, ..., 1) probed where the real part of xi_1 is 0."""
    n = ctx.n
    g = Metric([[(E.var(0) if i == 0 else 1.0) if i == j else 0.0 for j in range(n)] for i in range(n)])
    misses = 0
    for size in ctx.batches():
        xi = S.near_point(ctx.A, Chart(n), ctx.rng, size)
        c = xi[0].coeffs.copy()
        c[0] = 0.0
        xi = APoint([ctx.A.element(c)] + list(xi.coords[1:]))
        try:
            gram_invert_A(g, xi)
            misses += 1
        except NonInvertible:
            pass
    return float(misses)


def _met_nabla_lift(ctx):
    conn, g = ctx.geom.connection, ctx.geom.metric

    def body(size):
        theta, m1, m2, xi = ctx.vf(), ctx.vf(), ctx.vf(), ctx.point(size)
        L = lambda v: lift_vector_field(v, ctx.A)  # noqa: E731
        lhs = nabla_A_g(conn, g, L(theta), L(m1), L(m2))
        return _ldev(lhs, lift_function(nabla_g(conn, g, theta, m1, m2), ctx.A), xi)
    return _maxloop(ctx, body)


def _met_nabla_tensorial(ctx):
    conn, g = ctx.geom.connection, ctx.geom.metric

    def body(size):
        X, Y, Z, phi, xi = ctx.field(size), ctx.field(size), ctx.field(size), ctx.phi(size), ctx.point(size)
        base = nabla_A_g(conn, g, X, Y, Z)
        return max(_ldev(base, nabla_A_g(conn, g, X, Z, Y), xi),
                   _ldev(nabla_A_g(conn, g, X, phi * Y, Z), phi * base, xi))
    return _maxloop(ctx, body)


def _met_parallel(ctx):
    conn, g = ctx.geom.connection, ctx.geom.metric

    def body(size):
        X, Y, Z, xi = ctx.field(size), ctx.field(size), ctx.field(size), ctx.point(size)
        return float(np.max(np.abs(nabla_A_g(conn, g, X, Y, Z).evaluate(xi).coeffs)))
    return _maxloop(ctx, body)


CHECKS = [
    Check("algebra.commutative", "algebra", "ab = ba on all basis pairs", _alg_commutative, exact=True),
    Check("algebra.associative", "algebra", "(ab)c = a(bc) on all basis triples", _alg_associative, exact=True),
    Check("algebra.ring_laws", "algebra", "commutative, associative, distributive on random elements",
          _alg_ring_laws),
    Check("algebra.augmentation", "algebra", "augment is a linear multiplicative map A -> R",
          _alg_augmentation, exact=True),
    Check("algebra.inverse", "algebra", "u * invert(u) = 1 for |augment(u)| >= 0.1", _alg_inverse,
          threshold=1e-12),
    Check("algebra.nilpotency", "algebra", "augment(u) = 0 implies u^(k+1) = 0", _alg_nilpotency, exact=True),
    Check("algebra.components", "algebra", "u = sum_alpha a*_alpha(u) a_alpha", _alg_components, exact=True),

    Check("lift.additive", "lift", "(f+g)^A = f^A + g^A", _lift_additive),
    Check("lift.homogeneous", "lift", "(lambda f)^A = lambda f^A", _lift_homogeneous),
    Check("lift.multiplicative", "lift", "(f*g)^A = f^A * g^A", _lift_multiplicative),
    Check("lift.coordinate", "lift", "x_j^A(xi) = xi_j", _lift_coordinate, exact=True),
    Check("lift.augmentation", "lift", "augment(f^A(xi)) = f(pi(xi))", _lift_augmentation),
    Check("lift.taylor_oracle", "lift", "f^A(x+h) = sum_|a|<=k d^a f(x) h^a / a!", _lift_taylor),
    Check("lift.partials", "lift", "(d_i f)^A = d f^A / d xi_i", _lift_partials),
    Check("lift.decompose", "lift", "phi = sum_alpha a_alpha (a*_alpha o phi), in any basis", _lift_decompose),
    Check("lift.frame", "lift", "(d/dx_i)^A (x_j^A) = delta_ij", _lift_frame, exact=True),
    Check("lift.vector_field_action", "lift", "theta^A(f^A) = [theta(f)]^A", _lift_vf_action),
    Check("lift.vector_field_additive", "lift", "(theta1+theta2)^A = theta1^A + theta2^A", _lift_vf_additive),
    Check("lift.vector_field_module", "lift", "(f theta)^A = f^A theta^A", _lift_vf_module),
    Check("lift.derivation", "lift", "X(phi psi) = X(phi) psi + phi X(psi); X(a phi) = a X(phi)",
          _lift_leibniz),

    Check("bracket.base", "bracket", "[t,e] = -[e,t] and Jacobi on the base chart", _br_base),
    Check("bracket.lift", "bracket", "[theta1,theta2]^A = [theta1^A, theta2^A]", _br_lift),
    Check("bracket.skew", "bracket", "[X,Y] = -[Y,X], [X,X] = 0", _br_skew),
    Check("bracket.a_bilinear", "bracket", "[aX,Y] = a[X,Y], [X1+X2,Y] = [X1,Y]+[X2,Y]", _br_bilinear),
    Check("bracket.jacobi", "bracket", "[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]] = 0", _br_jacobi),

    Check("connection.base_leibniz", "connection", "nabla_t(f e) = t(f) e + f nabla_t e", _conn_base_leibniz),
    Check("connection.lift", "connection", "nabla^A_{theta^A} eta^A = (nabla_theta eta)^A", _conn_lift),
    Check("connection.leibniz", "connection", "D_X(phi Y) = X(phi) Y + phi D_X Y", _conn_leibniz),
    Check("connection.linear", "connection", "D_{phi X + Y} Z = phi D_X Z + D_Y Z", _conn_linear),

    Check("torsion.base_free", "torsion", "T(d_i, d_j) = 0 on the base chart", _tor_base_symmetric),
    Check("torsion.base_tensorial", "torsion", "T(f t, e) = f T(t, e), T skew on the base chart",
          _tor_base_tensorial),
    Check("torsion.lift", "torsion", "T^A(theta^A, eta^A) = [T(theta, eta)]^A", _tor_lift),
    Check("torsion.control_lift", "torsion", "T^A(theta^A, eta^A) = [T(theta, eta)]^A, torsionful control",
          _tor_control),
    Check("torsion.skew", "torsion", "T^A(X,Y) = -T^A(Y,X), T^A(X,X) = 0", _tor_skew),
    Check("torsion.tensorial", "torsion", "T^A(X, phi Y) = phi T^A(X, Y)", _tor_tensorial),
    Check("torsion.free_preserved", "torsion", "T = 0 implies T^A(X, Y) = 0 for all A-fields", _tor_free),

    Check("metric.base_compatible", "metric", "(nabla_theta g)(mu1, mu2) = 0 on the base chart",
          _met_base_compatible),
    Check("metric.lift", "metric", "g^A(eta^A, theta^A) = [g(eta, theta)]^A", _met_lift),
    Check("metric.scaled_lift", "metric", "g^A(a eta^A, b theta^A) = ab [g(eta, theta)]^A", _met_scaled_lift),
    Check("metric.bilinear", "metric", "g^A(X,Y) = g^A(Y,X), g^A(phi X, Y) = phi g^A(X,Y)", _met_bilinear),
    Check("metric.nondegenerate", "metric", "G G^-1 = I over A at every probe", _met_nondegenerate),
    Check("metric.degenerate_control", "metric", "diag(x1, 1) at augment(xi_1) = 0 is NonInvertible",
          _met_degenerate_control, exact=True),
    Check("metric.nabla_lift", "metric", "(nabla^A_{theta^A} g^A)(mu1^A, mu2^A) = [(nabla_theta g)(mu1, mu2)]^A",
          _met_nabla_lift),
    Check("metric.nabla_tensorial", "metric", "(nabla^A_X g^A) symmetric and C(U^A, A)-bilinear",
          _met_nabla_tensorial),
    Check("metric.parallel", "metric", "nabla^A_X g^A = 0 for all A-fields X, Y, Z", _met_parallel),
]
_CHECK_NAMES = {c.name for c in CHECKS}


def _seed_for(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _clean(x):
    return None if x is None or not math.isfinite(x) else float(x)


def run_suites(cfg: SuiteConfig) -> SuiteReport:
    """Run every check of the selected suites; results are deterministic given the seed."""
    algebra = construct_algebra(cfg.algebra)
    try:
        geom = geometry_from_descriptor(cfg.geometry)
    except SingularMetric as exc:
        raise ConfigError(f"field 'geometry': {exc}") from exc
    env = {"version": __version__, "seed": cfg.seed, "algebra": cfg.algebra, "algebra_dim": algebra.dim,
           "geometry": cfg.geometry, "preset": geom.name, "levi_civita": geom.is_levi_civita,
           "samples": cfg.samples, "tol": cfg.tol, "zero_tol": cfg.zero_tol, "suites": list(cfg.suites)}
    report = SuiteReport(env)
    with zero_tolerance(cfg.zero_tol):
        for check in CHECKS:
            if check.suite not in cfg.suites:
                continue
            tol = 0.0 if check.exact else (check.threshold if check.threshold is not None else cfg.tol)
            ctx = _Ctx(algebra, geom, cfg.samples, _seed_for(cfg.seed, check.name))
            error = None
            with np.errstate(all="ignore"):
                try:
                    dev = float(check.fn(ctx))
                except WeilError as exc:
                    dev, error = None, f"{type(exc).__name__}: {exc}"
            if dev is not None and not math.isfinite(dev):
                dev, error = None, "non-finite deviation"
            passed = dev is not None and dev <= tol
            expect = "fail" if check.name in cfg.expect_fail else "pass"
            report.checks.append(CheckResult(check.name, check.suite, check.anchor, cfg.samples,
                                             _clean(dev), tol, passed, expect, error))
    return report
