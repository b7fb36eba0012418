"""
surfdist - minimum distance between parametric surfaces by damped dynamics.

The two surfaces are treated as a pair of point masses joined by an
attracting potential. Their motion on the product of the two surfaces,
slowed by Rayleigh friction, settles where the separation vector is normal
to both surfaces; the distance at rest is the (local) minimum distance.

This library provides:
- Built-in analytic shapes (sphere, ellipsoid, torus, plane patch, line,
  circle) and expression-defined surfaces read from JSON documents
- Induced metrics and Christoffel symbols of a surface and of the pair
- The damped vector field, a Runge-Kutta integrator and energy diagnostics
- A single-start solver and a quasi-random multi-start driver
- A brute-force grid oracle and a finite-difference gradient check
- The ``surfdist`` command-line tool

Example:
    >>> from surfdist import Sphere, SolverConfig, solve
    >>> pair = (Sphere([0, 0, 0], 1.0), Sphere([4, 0, 0], 1.0))
    >>> result = solve(pair, config=SolverConfig(dt=1e-2), initial=[1.2, 0.3, 1.9, 2.8])
    >>> round(result.distance, 6)
    2.0
"""

__version__ = "0.1.0"

from .dynamics import (
    DissipationModel,
    MechanicalSystem,
    Potential,
    ProductState,
    energy,
    lyapunov,
    step_rk4,
    vector_field,
)
from .errors import (
    AllStartsFailed,
    CapExceeded,
    DegenerateSeparation,
    DomainViolation,
    EvaluationError,
    GeometryError,
    InputError,
    NonFiniteState,
    ParseError,
    SingularMetric,
    SolverError,
    SurfdistError,
    ValidationError,
)
from .expression import Expression, parse_expression
from .geometry import MetricBundle, ProductMetric, metric_bundle, product_bundle
from .manifold import (
    Circle,
    Ellipsoid,
    ExpressionSurface,
    GraphSurface,
    Line,
    ParameterRange,
    PlanePatch,
    Sphere,
    SurfaceDefinition,
    Torus,
    format_surface_spec,
    parse_surface_spec,
)
from .oracle import GridSpec, fd_gradient_check, grid_min_distance
from .problem import ProblemDocument, load_problem, parse_problem
from .solver import SolveResult, SolverConfig, multi_start, solve

__all__ = [
    "AllStartsFailed",
    "CapExceeded",
    "Circle",
    "DegenerateSeparation",
    "DissipationModel",
    "DomainViolation",
    "Ellipsoid",
    "EvaluationError",
    "Expression",
    "ExpressionSurface",
    "GeometryError",
    "GraphSurface",
    "GridSpec",
    "InputError",
    "Line",
    "MechanicalSystem",
    "MetricBundle",
    "NonFiniteState",
    "ParameterRange",
    "ParseError",
    "PlanePatch",
    "Potential",
    "ProblemDocument",
    "ProductMetric",
    "ProductState",
    "SingularMetric",
    "SolveResult",
    "SolverConfig",
    "SolverError",
    "Sphere",
    "SurfaceDefinition",
    "SurfdistError",
    "Torus",
    "ValidationError",
    "energy",
    "fd_gradient_check",
    "format_surface_spec",
    "grid_min_distance",
    "load_problem",
    "lyapunov",
    "metric_bundle",
    "multi_start",
    "parse_expression",
    "parse_problem",
    "parse_surface_spec",
    "product_bundle",
    "solve",
    "step_rk4",
    "vector_field",
]
