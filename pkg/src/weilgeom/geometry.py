"""Chart-level geometry on the base manifold.

Everything is symbolic over a single chart: metrics and Christoffel symbols
are arrays of :class:`~weilgeom.expr.Expr`, vector fields are component
tuples in the coordinate frame.  Christoffel symbols are indexed
``gamma[k][i][j]`` for the coefficient of d/dx_k in nabla_{d/dx_i} d/dx_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expr as E
from .errors import ConfigError, DomainExhausted, SingularMetric
from .expr import Expr, as_expr, diff, evaluate

__all__ = [
    "Chart", "Metric", "Connection", "VectorField", "Geometry",
    "levi_civita", "covariant_derivative", "bracket", "torsion", "nabla_g",
    "metric_pair", "preset", "geometry_from_descriptor", "PRESETS",
]

MAX_SAMPLING_TRIES = 1000


@dataclass(frozen=True)
class Chart:
    """Coordinate chart with an open domain {guard_i > 0 for all i}."""

    dim: int
    guard: tuple = ()
    box: tuple = ()
    names: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("chart dimension must be at least 1")
        if not self.box:
            object.__setattr__(self, "box", tuple((-2.0, 2.0) for _ in range(self.dim)))
        if len(self.box) != self.dim:
            raise ValueError("sampling box must give one interval per coordinate")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i + 1}" for i in range(self.dim)))
        for g in self.guard:
            if any(v >= self.dim for v in g.variables()):
                raise ValueError("domain guard uses a variable outside the chart")

    def contains(self, point) -> np.ndarray:
        ok = np.ones(np.shape(point[0]), dtype=bool)
        for g in self.guard:
            with np.errstate(all="ignore"):
                ok &= np.asarray(evaluate(g, point)) > 0
        return ok

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` points drawn uniformly from the box, rejected against the guard.

        Returns an array of shape (dim, size).
        """
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        out = np.empty((self.dim, size))
        todo = np.arange(size)
        for _ in range(MAX_SAMPLING_TRIES):
            cand = rng.uniform(lo[:, None], hi[:, None], size=(self.dim, todo.size))
            ok = self.contains(tuple(cand))
            out[:, todo[ok]] = cand[:, ok]
            todo = todo[~ok]
            if todo.size == 0:
                return out
        raise DomainExhausted(f"no in-domain point found after {MAX_SAMPLING_TRIES} tries")


def _expr_matrix(rows, n, what):
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"{what} must be {n}x{n}")
    return tuple(tuple(as_expr(E.parse(x) if isinstance(x, str) else x) for x in r) for r in rows)


class Metric:
    """Symmetric (0,2) tensor g_ij on the chart; signature unconstrained."""

    def __init__(self, entries: Sequence[Sequence]):
        n = len(entries)
        self.entries = _expr_matrix(entries, n, "metric")
        self.dim = n
        for i in range(n):
            for j in range(i + 1, n):
                if self.entries[i][j] != self.entries[j][i]:
                    raise ValueError(f"metric is not symmetric at ({i}, {j})")

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def is_diagonal(self) -> bool:
        return all(self.entries[i][j].is_const(0.0)
                   for i in range(self.dim) for j in range(self.dim) if i != j)

    def matrix(self, point) -> np.ndarray:
        """Numeric matrix at a point (trailing batch axes allowed)."""
        shape = np.shape(point[0])
        return np.array([[np.broadcast_to(evaluate(g, point), shape) for g in row]
                         for row in self.entries], dtype=float)

    def det(self) -> Expr:
        return _det([list(r) for r in self.entries])

    def inverse(self) -> tuple:
        """Symbolic inverse g^{ij}; direct for diagonal metrics, adjugate otherwise."""
        n = self.dim
        if self.is_diagonal():
            return tuple(tuple(E.div(1.0, self.entries[i][i]) if i == j else E.const(0.0)
                               for j in range(n)) for i in range(n))
        d = self.det()
        rows = [list(r) for r in self.entries]
        inv = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
                cof = _det(minor) if minor else E.const(1.0)
                if (i + j) % 2:
                    cof = E.neg(cof)
                inv[j][i] = E.div(cof, d)
        return tuple(tuple(r) for r in inv)


def _det(rows) -> Expr:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = E.const(0.0)
    for j in range(n):
        if rows[0][j].is_const(0.0):
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = E.mul(rows[0][j], _det(minor))
        total = E.add(total, term) if j % 2 == 0 else E.sub(total, term)
    return total


class Connection:
    """Linear connection stored as Christoffel symbols gamma[k][i][j]."""

    def __init__(self, gamma):
        n = len(gamma)
        if any(len(gk) != n or any(len(row) != n for row in gk) for gk in gamma):
            raise ValueError("Christoffel array must be n x n x n")
        self.gamma = tuple(tuple(tuple(as_expr(E.parse(x) if isinstance(x, str) else x)
                                       for x in row) for row in gk) for gk in gamma)
        self.dim = n

    def __getitem__(self, kij):
        k, i, j = kij
        return self.gamma[k][i][j]

    def is_symmetric(self) -> bool:
        n = self.dim
        return all(self.gamma[k][i][j] == self.gamma[k][j][i]
                   for k in range(n) for i in range(n) for j in range(n))

    def perturbed(self, k: int, i: int, j: int, delta: float) -> "Connection":
        g = [[list(row) for row in gk] for gk in self.gamma]
        g[k][i][j] = E.add(g[k][i][j], delta)
        return Connection(g)

    @classmethod
    def flat(cls, n: int) -> "Connection":
        zero = E.const(0.0)
        return cls([[[zero] * n for _ in range(n)] for _ in range(n)])


class VectorField:
    """theta = sum_i theta^i d/dx_i."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence):
        self.components = tuple(as_expr(E.parse(c) if isinstance(c, str) else c) for c in components)

    @classmethod
    def coordinate(cls, i: int, n: int) -> "VectorField":
        return cls([1.0 if k == i else 0.0 for k in range(n)])

    @property
    def dim(self) -> int:
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_dim(self, other)
        return VectorField([E.add(a, b) for a, b in zip(self, other)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        _same_dim(self, other)
        return VectorField([E.sub(a, b) for a, b in zip(self, other)])

    def __rmul__(self, f) -> "VectorField":
        """f * theta for a function (or number) f."""
        f = as_expr(f)
        return VectorField([E.mul(f, c) for c in self])

    def apply(self, f) -> Expr:
        """theta(f) = sum_i theta^i df/dx_i."""
        f = as_expr(f)
        out = E.const(0.0)
        for i, c in enumerate(self.components):
            out = E.add(out, E.mul(c, diff(f, i)))
        return out

    __call__ = apply

    def evaluate(self, point) -> np.ndarray:
        shape = np.shape(point[0])
        return np.array([np.broadcast_to(evaluate(c, point), shape) for c in self.components])

    def __repr__(self):
        return f"VectorField({[str(c) for c in self.components]})"


def _same_dim(*objs):
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")


def levi_civita(g: Metric, probe_points=None, zero_tol: float = 1e-12) -> Connection:
    """Christoffel symbols of the metric connection.

    gamma^k_ij = 1/2 sum_l g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).  When
    ``probe_points`` (shape (n, m)) is given, the determinant is checked there
    first and :class:`SingularMetric` raised if it vanishes.
    """
    n = g.dim
    if probe_points is not None:
        dets = np.atleast_1d(evaluate(g.det(), tuple(np.asarray(probe_points, dtype=float))))
        if np.any(np.abs(dets) <= zero_tol):
            raise SingularMetric("metric determinant vanishes at a probe point")
    ginv = g.inverse()
    half = E.const(0.5)
    gamma = [[[None] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                s = E.const(0.0)
                for l in range(n):
                    if ginv[k][l].is_const(0.0):
                        continue
                    bracket_ = E.sub(E.add(diff(g[j, l], i), diff(g[i, l], j)), diff(g[i, j], l))
                    s = E.add(s, E.mul(ginv[k][l], bracket_))
                gamma[k][i][j] = gamma[k][j][i] = E.mul(half, s)
    return Connection(gamma)


def covariant_derivative(conn: Connection, theta: VectorField, eta: VectorField) -> VectorField:
    """(nabla_theta eta)^k = theta(eta^k) + sum_ij theta^i eta^j gamma^k_ij."""
    _same_dim(conn, theta, eta)
    n = conn.dim
    out = []
    for k in range(n):
        c = theta.apply(eta[k])
        for i in range(n):
            for j in range(n):
                gk = conn[k, i, j]
                if not gk.is_const(0.0):
                    c = E.add(c, E.mul(E.mul(theta[i], eta[j]), gk))
        out.append(c)
    return VectorField(out)


def bracket(theta: VectorField, eta: VectorField) -> VectorField:
    """[theta, eta]^k = theta(eta^k) - eta(theta^k)."""
    _same_dim(theta, eta)
    return VectorField([E.sub(theta.apply(eta[k]), eta.apply(theta[k])) for k in range(theta.dim)])


def torsion(conn: Connection, theta: VectorField, eta: VectorField) -> VectorField:
    return (covariant_derivative(conn, theta, eta) - covariant_derivative(conn, eta, theta)
            - bracket(theta, eta))


def metric_pair(g: Metric, x: VectorField, y: VectorField) -> Expr:
    """g(x, y) = sum_ij g_ij x^i y^j."""
    _same_dim(g, x, y)
    out = E.const(0.0)
    for i in range(g.dim):
        for j in range(g.dim):
            if not g[i, j].is_const(0.0):
                out = E.add(out, E.mul(E.mul(g[i, j], x[i]), y[j]))
    return out


def nabla_g(conn: Connection, g: Metric, theta: VectorField, mu1: VectorField,
            mu2: VectorField) -> Expr:
    """(nabla_theta g)(mu1, mu2) as an expression; evaluate it at probe points."""
    return E.sub(E.sub(theta.apply(metric_pair(g, mu1, mu2)),
                       metric_pair(g, covariant_derivative(conn, theta, mu1), mu2)),
                 metric_pair(g, mu1, covariant_derivative(conn, theta, mu2)))


# -- presets and descriptors ----------------------------------------------

@dataclass
class Geometry:
    """A chart, a metric on it, and the connection to prolong."""

    name: str
    chart: Chart
    metric: Metric
    connection: Connection
    is_levi_civita: bool = True
    descriptor: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.chart.dim


def _diag(entries):
    n = len(entries)
    return [[entries[i] if i == j else 0.0 for j in range(n)] for i in range(n)]


def _preset_parts(name: str, dim: int | None):
    x = E.variables(2)
    if name == "euclid":
        n = 2 if dim is None else dim
        return Chart(n), Metric(_diag([1.0] * n))
    if name == "minkowski":
        n = 2 if dim is None else dim
        return Chart(n), Metric(_diag([-1.0] + [1.0] * (n - 1)))
    if dim not in (None, 2):
        raise ConfigError(f"preset {name!r} is two-dimensional, got dim={dim}")
    if name == "poincare":
        chart = Chart(2, guard=(x[1],), box=((-2.0, 2.0), (0.5, 2.0)), names=("x", "y"))
        w = E.power(x[1], -2)
        return chart, Metric(_diag([w, w]))
    if name == "sphere":
        chart = Chart(2, guard=(x[0], E.sub(math.pi, x[0])), box=((0.5, math.pi - 0.5), (-2.0, 2.0)),
                      names=("theta", "phi"))
        return chart, Metric(_diag([1.0, E.power(E.sin(x[0]), 2)]))
    raise ConfigError(f"unknown geometry preset {name!r}")


PRESETS = ("euclid", "minkowski", "poincare", "sphere")


def preset(name: str, dim: int | None = None) -> Geometry:
    """Named geometry with its Levi-Civita connection."""
    chart, g = _preset_parts(name, dim)
    desc = {"preset": name, "dim": chart.dim}
    return Geometry(name, chart, g, levi_civita(g), True, desc)


def _probe(chart: Chart, n_points: int = 16):
    return chart.sample(np.random.default_rng(0), n_points)


def geometry_from_descriptor(desc) -> Geometry:
    """Resolve a geometry descriptor (see README for the JSON schema)."""
    if isinstance(desc, Geometry):
        return desc
    if not isinstance(desc, dict):
        raise ConfigError(f"geometry descriptor must be an object, got {desc!r}")
    unknown = set(desc) - {"preset", "dim", "custom", "christoffel", "perturb"}
    if unknown:
        raise ConfigError(f"unknown geometry field(s): {sorted(unknown)}")
    if ("preset" in desc) == ("custom" in desc):
        raise ConfigError("geometry needs exactly one of 'preset' or 'custom'")
    try:
        if "preset" in desc:
            dim = desc.get("dim")
            if dim is not None and (not isinstance(dim, int) or isinstance(dim, bool) or dim < 1):
                raise ConfigError(f"geometry field 'dim' must be a positive integer, got {dim!r}")
            if desc["preset"] not in PRESETS:
                raise ConfigError(f"geometry field 'preset': unknown preset {desc['preset']!r}")
            chart, g = _preset_parts(desc["preset"], dim)
            name = desc["preset"]
        else:
            c = desc["custom"]
            if not isinstance(c, dict) or "dim" not in c or "metric" not in c:
                raise ConfigError("geometry field 'custom' needs 'dim' and 'metric'")
            n = c["dim"]
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                raise ConfigError(f"geometry field 'custom.dim' must be a positive integer, got {n!r}")
            guard = E.parse_guard(c["domain"]) if c.get("domain") else ()
            box = tuple(tuple(map(float, b)) for b in c.get("box", ())) or ()
            chart = Chart(n, guard=guard, box=box)
            g = Metric(c["metric"])
            if g.dim != n:
                raise ConfigError("geometry field 'custom.metric' does not match 'custom.dim'")
            name = "custom"
        if "christoffel" in desc:
            conn = Connection(desc["christoffel"])
            if conn.dim != chart.dim:
                raise ConfigError("geometry field 'christoffel' does not match the chart dimension")
            is_lc = False
        else:
            conn = levi_civita(g, probe_points=_probe(chart))
            is_lc = True
        for p in desc.get("perturb", ()):
            k, i, j = p["index"]
            conn = conn.perturbed(k, i, j, float(p["delta"]))
            is_lc = False
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        raise ConfigError(f"geometry descriptor: {exc}") from exc
    return Geometry(name, chart, g, conn, is_lc, dict(desc))
