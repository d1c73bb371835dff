"""Weil-algebra arithmetic and prolongation of chart geometry to Weil bundles."""

__version__ = "0.1.0"

from .algebra import (AElement, WeilAlgebra, augment, component, construct_algebra, invert, mul,
                      tensor_product, zero_tolerance)
from .calculus import APoint, a_partial, lift_eval, taylor_oracle
from .errors import (AlgebraMismatch, ConfigError, DomainError, DomainExhausted, NonInvertible,
                     SingularMetric, WeilError)
from .expr import Expr, diff, evaluate, parse, to_string
from .geometry import (Chart, Connection, Geometry, Metric, VectorField, bracket,
                       covariant_derivative, geometry_from_descriptor, levi_civita, nabla_g,
                       preset, torsion)
from .prolong import (ALiftFunction, AVectorField, apply_vector_field, bracket_A, decompose,
                      gram_invert_A, lift_function, lift_vector_field, metric_A, nabla_A,
                      nabla_A_g, torsion_A)
from .harness import SuiteConfig, SuiteReport, parse_config, run_suites
