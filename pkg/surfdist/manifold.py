"""
Parametric submanifolds of R^N.

Provides the built-in analytic shapes (sphere, ellipsoid, torus, plane patch,
line, circle) and expression-defined surfaces (graph, expression) whose
derivatives come from central finite differences. Every surface evaluates
its position and its jet (position, Jacobian, second partials) at a point
of its parameter domain.

Surfaces are read from and written to JSON specification documents:

    >>> surface = parse_surface_spec('{"kind": "sphere", "center": [0, 0, 0], "radius": 1}')
    >>> surface.param_dim, surface.ambient_dim
    (2, 3)
"""

import json
import math
from functools import cached_property
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainViolation, ParseError, ValidationError
from .expression import Expression, parse_expression

DEFAULT_DERIVATIVE_STEP = 1e-5
# Second partials are differenced with a wider step than the Jacobian
SECOND_STEP_FACTOR = 10.0
RANK_TOLERANCE = 1e-10

TWO_PI = 2.0 * math.pi


class ParameterRange:
    """One parameter interval, either clamped or periodic."""

    __slots__ = ("lo", "hi", "periodic")

    def __init__(self, lo: float, hi: float, periodic: bool = False):
        self.lo = float(lo)
        self.hi = float(hi)
        self.periodic = bool(periodic)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_spec(self) -> list:
        return [self.lo, self.hi, "periodic"] if self.periodic else [self.lo, self.hi]

    def __eq__(self, other):
        return (
            isinstance(other, ParameterRange)
            and (self.lo, self.hi, self.periodic) == (other.lo, other.hi, other.periodic)
        )

    def __repr__(self):
        flag = ", periodic" if self.periodic else ""
        return f"ParameterRange({self.lo!r}, {self.hi!r}{flag})"


class SurfaceJet:
    """Position, first and second partials of a surface at one point."""

    def __init__(self, position: np.ndarray, jacobian: np.ndarray, second: np.ndarray):
        self.position = position
        self.jacobian = jacobian
        self.second = second

    @cached_property
    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.jacobian, compute_uv=False)

    @cached_property
    def singular(self) -> bool:
        """True when the Jacobian loses column rank (a chart singularity)."""
        s = self.singular_values
        return bool(s[0] == 0.0 or s[-1] < RANK_TOLERANCE * s[0])


class SurfaceDefinition:
    """
    A smooth map from an n-dimensional parameter box into R^N.

    Subclasses provide ``_position`` and either an analytic ``_jet`` or rely
    on the finite-difference jet. Instances are immutable after construction
    and safe to share between threads.
    """

    kind = "surface"
    derivative_mode = "analytic"

    def __init__(
        self,
        domain: Sequence[ParameterRange],
        ambient_dim: int,
        mass: float = 1.0,
        derivative_step: float = DEFAULT_DERIVATIVE_STEP,
        name: Optional[str] = None,
    ):
        self.domain: Tuple[ParameterRange, ...] = tuple(domain)
        self.ambient_dim = int(ambient_dim)
        self.mass = float(mass)
        self.derivative_step = float(derivative_step)
        self.name = name
        if self.param_dim < 1:
            raise ValidationError("a surface needs at least one parameter", "domain")
        if self.param_dim >= self.ambient_dim:
            raise ValidationError(
                f"parameter dimension {self.param_dim} must be below ambient dimension "
                f"{self.ambient_dim}",
                "domain",
            )
        if not self.mass > 0.0:
            raise ValidationError("must be positive", "mass")
        if not self.derivative_step > 0.0:
            raise ValidationError("must be positive", "derivative_step")

        self._lo = np.array([r.lo for r in self.domain])
        self._hi = np.array([r.hi for r in self.domain])
        self._periodic = np.array([r.periodic for r in self.domain], dtype=bool)
        self._any_periodic = bool(self._periodic.any())
        self._period = self._hi - self._lo

    @property
    def param_dim(self) -> int:
        return len(self.domain)

    def wrap(self, params) -> np.ndarray:
        """Reduce periodic parameters modulo their period, reject clamped overflow."""
        q = np.array(params, dtype=float).reshape(-1)
        if q.shape[0] != self.param_dim:
            raise ValidationError(
                f"expected {self.param_dim} parameters, got {q.shape[0]}", "params"
            )
        outside = (q < self._lo) | (q > self._hi)
        if self._any_periodic:
            # in-range entries are left untouched so fixed points stay bitwise fixed
            m = self._periodic & (outside | (q == self._hi))
            q[m] = self._lo[m] + np.mod(q[m] - self._lo[m], self._period[m])
            outside &= ~self._periodic
        if outside.any():
            i = int(np.flatnonzero(outside)[0])
            raise DomainViolation(i, float(q[i]), self.domain[i].lo, self.domain[i].hi)
        return q

    def evaluate(self, params) -> np.ndarray:
        """Position x(params) in R^N."""
        return self._position(self.wrap(params))

    def wrap_many(self, points) -> np.ndarray:
        """Row-wise ``wrap`` for a K×n array of parameter points."""
        q = np.array(points, dtype=float).reshape(-1, self.param_dim)
        outside = (q < self._lo) | (q > self._hi)
        if self._any_periodic:
            m = self._periodic & (outside | (q == self._hi))
            q = np.where(m, self._lo + np.mod(q - self._lo, self._period), q)
            outside &= ~self._periodic
        if outside.any():
            k, i = (int(j) for j in np.argwhere(outside)[0])
            raise DomainViolation(i, float(q[k, i]), self.domain[i].lo, self.domain[i].hi)
        return q

    def evaluate_many(self, points) -> np.ndarray:
        """Positions for a K×n array of parameter points (K×N result)."""
        return np.array([self._position(p) for p in self.wrap_many(points)])

    def jet(self, params) -> SurfaceJet:
        """Position, Jacobian (N×n) and symmetric second partials (N×n×n)."""
        q = self.wrap(params)
        return self._jet(q)

    def _position(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _jet(self, q: np.ndarray) -> SurfaceJet:
        return finite_difference_jet(self, q, self.derivative_step)

    def to_spec(self) -> Dict[str, Any]:
        raise NotImplementedError

    def _common_spec(self) -> Dict[str, Any]:
        spec: Dict[str, Any] = {}
        if self.name is not None:
            spec["name"] = self.name
        spec["mass"] = self.mass
        if self.derivative_mode != "analytic":
            spec["derivative_step"] = self.derivative_step
        return spec

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<{type(self).__name__}{label} n={self.param_dim} N={self.ambient_dim}>"


def finite_difference_jet(surface: SurfaceDefinition, params, h: float) -> SurfaceJet:
    """
    Jet by central differences: Jacobian with step h (error O(h^2)), second
    partials with step 10h, symmetric by construction.
    """
    f = surface.evaluate
    p = np.asarray(params, dtype=float)
    n = p.shape[0]
    x0 = f(p)
    eye = np.eye(n)

    jacobian = np.empty((x0.shape[0], n))
    for a in range(n):
        jacobian[:, a] = (f(p + h * eye[a]) - f(p - h * eye[a])) / (2.0 * h)

    H = SECOND_STEP_FACTOR * h
    second = np.empty((x0.shape[0], n, n))
    for a in range(n):
        second[:, a, a] = (f(p + H * eye[a]) - 2.0 * x0 + f(p - H * eye[a])) / (H * H)
        for b in range(a + 1, n):
            plus, minus = eye[a] + eye[b], eye[a] - eye[b]
            mixed = (
                f(p + H * plus) - f(p + H * minus) - f(p - H * minus) + f(p - H * plus)
            ) / (4.0 * H * H)
            second[:, a, b] = mixed
            second[:, b, a] = mixed
    return SurfaceJet(x0, jacobian, second)


# ---------------------------------------------------------------------------
# Built-in analytic shapes
# ---------------------------------------------------------------------------


def _pole_frame(pole) -> np.ndarray:
    """Orthonormal columns (e1, e2, pole); the default pole (0, 0, 1) gives the identity."""
    e3 = np.array(pole, dtype=float)
    e3 = e3 / np.linalg.norm(e3)
    e1 = np.eye(3)[int(np.argmin(np.abs(e3)))]
    e1 = e1 - (e1 @ e3) * e3
    e1 = e1 / np.linalg.norm(e1)
    return np.column_stack([e1, np.cross(e3, e1), e3])


class Ellipsoid(SurfaceDefinition):
    """
    Ellipsoid with semi-axes along a frame, chart (θ ∈ [0, π], φ periodic).

    θ = 0 is at ``pole`` (default +z). The chart is singular at both poles,
    so a pole may be turned away from where closest points are expected.
    """

    kind = "ellipsoid"

    def __init__(self, center, semi_axes, pole=None, **kwargs):
        self.center = np.array(center, dtype=float)
        self.semi_axes = np.array(semi_axes, dtype=float)
        self.pole = None if pole is None else np.array(pole, dtype=float)
        self._frame = None if pole is None else _pole_frame(pole)
        super().__init__(
            [ParameterRange(0.0, math.pi), ParameterRange(0.0, TWO_PI, periodic=True)],
            ambient_dim=3,
            **kwargs,
        )

    def _orient(self, local: np.ndarray) -> np.ndarray:
        if self._frame is None:
            return local
        return np.tensordot(self._frame, local, axes=(1, 0))

    def _position(self, q):
        st, ct = math.sin(q[0]), math.cos(q[0])
        sp, cp = math.sin(q[1]), math.cos(q[1])
        return self.center + self._orient(self.semi_axes * np.array([st * cp, st * sp, ct]))

    def evaluate_many(self, points):
        q = self.wrap_many(points)
        theta, phi = q[:, 0], q[:, 1]
        unit = np.stack(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1
        )
        local = unit * self.semi_axes
        if self._frame is not None:
            local = local @ self._frame.T
        return self.center + local

    def _jet(self, q):
        st, ct = math.sin(q[0]), math.cos(q[0])
        sp, cp = math.sin(q[1]), math.cos(q[1])
        s = self.semi_axes[:, None]
        position = self.semi_axes * np.array([st * cp, st * sp, ct])
        jacobian = s * np.array([[ct * cp, -st * sp], [ct * sp, st * cp], [-st, 0.0]])
        second = np.empty((3, 2, 2))
        second[:, 0, 0] = self.semi_axes * np.array([-st * cp, -st * sp, -ct])
        mixed = self.semi_axes * np.array([-ct * sp, ct * cp, 0.0])
        second[:, 0, 1] = mixed
        second[:, 1, 0] = mixed
        second[:, 1, 1] = self.semi_axes * np.array([-st * cp, -st * sp, 0.0])
        return SurfaceJet(
            self.center + self._orient(position), self._orient(jacobian), self._orient(second)
        )

    def _pole_spec(self) -> Dict[str, Any]:
        return {} if self.pole is None else {"pole": self.pole.tolist()}

    def to_spec(self):
        spec = {"kind": self.kind, "center": self.center.tolist(), "semi_axes": self.semi_axes.tolist()}
        spec.update(self._pole_spec())
        spec.update(self._common_spec())
        return spec


class Sphere(Ellipsoid):
    """Round sphere, x = c + r (sinθ cosφ, sinθ sinφ, cosθ) in the pole frame."""

    kind = "sphere"

    def __init__(self, center, radius: float, pole=None, **kwargs):
        self.radius = float(radius)
        super().__init__(center, [radius, radius, radius], pole, **kwargs)

    def to_spec(self):
        spec = {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}
        spec.update(self._pole_spec())
        spec.update(self._common_spec())
        return spec


class Torus(SurfaceDefinition):
    """Torus around the z axis; u runs around the tube, v around the axis."""

    kind = "torus"

    def __init__(self, center, major_radius: float, minor_radius: float, **kwargs):
        self.center = np.array(center, dtype=float)
        self.major_radius = float(major_radius)
        self.minor_radius = float(minor_radius)
        super().__init__(
            [ParameterRange(0.0, TWO_PI, periodic=True), ParameterRange(0.0, TWO_PI, periodic=True)],
            ambient_dim=3,
            **kwargs,
        )

    def _position(self, q):
        R, r = self.major_radius, self.minor_radius
        su, cu = math.sin(q[0]), math.cos(q[0])
        sv, cv = math.sin(q[1]), math.cos(q[1])
        return self.center + np.array([(R + r * cu) * cv, (R + r * cu) * sv, r * su])

    def evaluate_many(self, points):
        q = self.wrap_many(points)
        R, r = self.major_radius, self.minor_radius
        u, v = q[:, 0], q[:, 1]
        ring = R + r * np.cos(u)
        return self.center + np.stack([ring * np.cos(v), ring * np.sin(v), r * np.sin(u)], axis=1)

    def _jet(self, q):
        R, r = self.major_radius, self.minor_radius
        su, cu = math.sin(q[0]), math.cos(q[0])
        sv, cv = math.sin(q[1]), math.cos(q[1])
        ring = R + r * cu
        position = self.center + np.array([ring * cv, ring * sv, r * su])
        jacobian = np.array([[-r * su * cv, -ring * sv], [-r * su * sv, ring * cv], [r * cu, 0.0]])
        second = np.empty((3, 2, 2))
        second[:, 0, 0] = [-r * cu * cv, -r * cu * sv, -r * su]
        mixed = np.array([r * su * sv, -r * su * cv, 0.0])
        second[:, 0, 1] = mixed
        second[:, 1, 0] = mixed
        second[:, 1, 1] = [-ring * cv, -ring * sv, 0.0]
        return SurfaceJet(position, jacobian, second)

    def to_spec(self):
        spec = {
            "kind": self.kind,
            "center": self.center.tolist(),
            "major_radius": self.major_radius,
            "minor_radius": self.minor_radius,
        }
        spec.update(self._common_spec())
        return spec


class AffinePatch(SurfaceDefinition):
    """x = point + Σ_a ξ^a axis_a over a box of parameters."""

    kind = "affine"

    def __init__(self, point, axes, domain: Sequence[ParameterRange], **kwargs):
        self.point = np.array(point, dtype=float)
        self.axes = np.array(axes, dtype=float).reshape(len(domain), -1)
        super().__init__(domain, ambient_dim=self.point.shape[0], **kwargs)
        self._basis = self.axes.T.copy()

    def _position(self, q):
        return self.point + self._basis @ q

    def evaluate_many(self, points):
        return self.point + self.wrap_many(points) @ self.axes

    def _jet(self, q):
        n = self.param_dim
        return SurfaceJet(
            self.point + self._basis @ q,
            self._basis.copy(),
            np.zeros((self.ambient_dim, n, n)),
        )


class PlanePatch(AffinePatch):
    kind = "plane-patch"

    def to_spec(self):
        spec = {
            "kind": self.kind,
            "point": self.point.tolist(),
            "axes": self.axes.tolist(),
            "domain": [r.to_spec() for r in self.domain],
        }
        spec.update(self._common_spec())
        return spec


class Line(AffinePatch):
    """Straight line x = point + t·direction (direction is not normalized)."""

    kind = "line"

    def __init__(self, point, direction, domain: Optional[Sequence[ParameterRange]] = None, **kwargs):
        super().__init__(point, [direction], domain or [ParameterRange(-10.0, 10.0)], **kwargs)

    @property
    def direction(self) -> np.ndarray:
        return self.axes[0]

    def to_spec(self):
        spec = {
            "kind": self.kind,
            "point": self.point.tolist(),
            "direction": self.direction.tolist(),
            "domain": [r.to_spec() for r in self.domain],
        }
        spec.update(self._common_spec())
        return spec


class Circle(SurfaceDefinition):
    """Circle of given radius in the plane of two (orthonormalized) axes."""

    kind = "circle"

    def __init__(self, center, radius: float, axes=None, **kwargs):
        self.center = np.array(center, dtype=float)
        self.radius = float(radius)
        dim = self.center.shape[0]
        self.axes = None if axes is None else np.array(axes, dtype=float)
        if self.axes is None:
            e1, e2 = np.eye(dim)[0], np.eye(dim)[1]
        else:
            e1 = self.axes[0] / np.linalg.norm(self.axes[0])
            e2 = self.axes[1] - (self.axes[1] @ e1) * e1
            e2 = e2 / np.linalg.norm(e2)
        self._e1, self._e2 = e1, e2
        super().__init__([ParameterRange(0.0, TWO_PI, periodic=True)], ambient_dim=dim, **kwargs)

    def _position(self, q):
        return self.center + self.radius * (math.cos(q[0]) * self._e1 + math.sin(q[0]) * self._e2)

    def evaluate_many(self, points):
        u = self.wrap_many(points)[:, 0]
        return self.center + self.radius * (
            np.cos(u)[:, None] * self._e1 + np.sin(u)[:, None] * self._e2
        )

    def _jet(self, q):
        c, s = math.cos(q[0]), math.sin(q[0])
        r = self.radius
        radial = c * self._e1 + s * self._e2
        tangent = -s * self._e1 + c * self._e2
        return SurfaceJet(
            self.center + r * radial,
            (r * tangent)[:, None],
            (-r * radial)[:, None, None],
        )

    def to_spec(self):
        spec: Dict[str, Any] = {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}
        if self.axes is not None:
            spec["axes"] = self.axes.tolist()
        spec.update(self._common_spec())
        return spec


# ---------------------------------------------------------------------------
# Expression-defined surfaces
# ---------------------------------------------------------------------------


class ExpressionSurface(SurfaceDefinition):
    """Surface whose coordinates are arithmetic expressions of named parameters."""

    kind = "expression"
    derivative_mode = "finite-difference"

    def __init__(
        self,
        variables: Sequence[str],
        components: Sequence[str],
        domain: Sequence[ParameterRange],
        **kwargs,
    ):
        self.variables = list(variables)
        self.sources = list(components)
        self.components: List[Expression] = [parse_expression(c, self.variables) for c in self.sources]
        if len(domain) != len(self.variables):
            raise ValidationError(
                f"{len(domain)} domain intervals for {len(self.variables)} vars", "domain"
            )
        super().__init__(domain, ambient_dim=len(self.components), **kwargs)

    def _position(self, q):
        values = q.tolist()
        return np.array([c(*values) for c in self.components])

    def to_spec(self):
        spec = {
            "kind": self.kind,
            "vars": list(self.variables),
            "components": list(self.sources),
            "domain": [r.to_spec() for r in self.domain],
        }
        spec.update(self._common_spec())
        return spec


class GraphSurface(ExpressionSurface):
    """Graph of a scalar function: x = (vars..., function(vars))."""

    kind = "graph"

    def __init__(self, variables: Sequence[str], function: str, domain: Sequence[ParameterRange], **kwargs):
        self.function = function
        super().__init__(variables, list(variables) + [function], domain, **kwargs)

    def to_spec(self):
        spec = {
            "kind": self.kind,
            "vars": list(self.variables),
            "function": self.function,
            "domain": [r.to_spec() for r in self.domain],
        }
        spec.update(self._common_spec())
        return spec


# ---------------------------------------------------------------------------
# Specification documents
# ---------------------------------------------------------------------------


class _SpecReader:
    """Pull typed fields out of a spec mapping and reject leftovers."""

    COMMON = ("kind", "mass", "derivative_step", "name", "ambient_dim")

    def __init__(self, spec: Mapping[str, Any]):
        self.spec = spec
        self.used = set(self.COMMON)

    def has(self, key: str) -> bool:
        return key in self.spec

    def _get(self, key, required):
        self.used.add(key)
        value = self.spec.get(key)
        if value is None and required:
            message = "missing required field" if key not in self.spec else "must not be null"
            raise ValidationError(message, key)
        return value

    @staticmethod
    def _check_numbers(items, field: str) -> None:
        for item in items:
            if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
                raise ValidationError(f"expected finite numbers, got {item!r}", field)

    def number(self, key: str, default: Optional[float] = None, positive: bool = False) -> float:
        value = self._get(key, default is None)
        if value is None:
            return default
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValidationError(f"expected a finite number, got {value!r}", key)
        if positive and not value > 0:
            raise ValidationError(f"must be positive, got {value!r}", key)
        return float(value)

    def vector(self, key: str, dim: Optional[int] = None, required: bool = True) -> Optional[List[float]]:
        value = self._get(key, required)
        if value is None:
            return None
        if not isinstance(value, list) or not value:
            raise ValidationError(f"expected a list of numbers, got {value!r}", key)
        self._check_numbers(value, key)
        if dim is not None and len(value) != dim:
            raise ValidationError(f"expected {dim} components, got {len(value)}", key)
        return [float(v) for v in value]

    def vectors(self, key: str, count: int, dim: int, required: bool = True):
        value = self._get(key, required)
        if value is None:
            return None
        if not isinstance(value, list) or len(value) != count:
            raise ValidationError(f"expected {count} vectors", key)
        rows = []
        for i, row in enumerate(value):
            if not isinstance(row, list) or len(row) != dim:
                raise ValidationError(f"expected {dim} components", f"{key}[{i}]")
            self._check_numbers(row, f"{key}[{i}]")
            rows.append([float(v) for v in row])
        matrix = np.array(rows)
        if np.linalg.matrix_rank(matrix) < count:
            raise ValidationError("vectors are linearly dependent", key)
        return rows

    def strings(self, key: str) -> List[str]:
        value = self._get(key, True)
        if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
            raise ValidationError(f"expected a non-empty list of strings, got {value!r}", key)
        return list(value)

    def string(self, key: str) -> str:
        value = self._get(key, True)
        if not isinstance(value, str):
            raise ValidationError(f"expected a string, got {value!r}", key)
        return value

    def domain(self, key: str, count: int, default: Optional[List[ParameterRange]] = None):
        value = self._get(key, default is None)
        if value is None:
            return default
        if not isinstance(value, list) or len(value) != count:
            raise ValidationError(f"expected {count} intervals", key)
        ranges = []
        for i, item in enumerate(value):
            field = f"{key}[{i}]"
            if not isinstance(item, list) or len(item) not in (2, 3):
                raise ValidationError("expected [lo, hi] or [lo, hi, \"periodic\"]", field)
            lo, hi = item[0], item[1]
            for bound in (lo, hi):
                if isinstance(bound, bool) or not isinstance(bound, (int, float)) or not math.isfinite(bound):
                    raise ValidationError(f"bounds must be finite numbers, got {bound!r}", field)
            if not lo < hi:
                raise ValidationError(f"empty interval [{lo}, {hi}]", field)
            flag = item[2] if len(item) == 3 else "clamped"
            if flag not in ("periodic", "clamped"):
                raise ValidationError(f"unknown wrap flag {flag!r}", field)
            ranges.append(ParameterRange(lo, hi, periodic=flag == "periodic"))
        return ranges

    def common(self) -> Dict[str, Any]:
        kwargs: Dict[str, Any] = {
            "mass": self.number("mass", 1.0, positive=True),
            "derivative_step": self.number("derivative_step", DEFAULT_DERIVATIVE_STEP, positive=True),
        }
        if "name" in self.spec:
            if not isinstance(self.spec["name"], str):
                raise ValidationError("expected a string", "name")
            kwargs["name"] = self.spec["name"]
        return kwargs

    def finish(self, surface: SurfaceDefinition) -> SurfaceDefinition:
        for key in self.spec:
            if key not in self.used:
                raise ValidationError(f"unknown field for kind {self.spec.get('kind')!r}", key)
        if "ambient_dim" in self.spec:
            declared = self.spec["ambient_dim"]
            if declared != surface.ambient_dim:
                raise ValidationError(
                    f"declared {declared!r} but the surface lives in R^{surface.ambient_dim}",
                    "ambient_dim",
                )
        return surface


def _read_pole(r: _SpecReader):
    pole = r.vector("pole", 3, required=False)
    if pole is not None and not any(pole):
        raise ValidationError("must be non-zero", "pole")
    return pole


def _read_sphere(r: _SpecReader):
    return Sphere(
        r.vector("center", 3), r.number("radius", positive=True), _read_pole(r), **r.common()
    )


def _read_ellipsoid(r: _SpecReader):
    axes = r.vector("semi_axes", 3)
    if min(axes) <= 0:
        raise ValidationError("semi-axes must be positive", "semi_axes")
    return Ellipsoid(r.vector("center", 3), axes, _read_pole(r), **r.common())


def _read_torus(r: _SpecReader):
    major = r.number("major_radius", positive=True)
    minor = r.number("minor_radius", positive=True)
    if minor >= major:
        raise ValidationError("must be smaller than major_radius", "minor_radius")
    return Torus(r.vector("center", 3), major, minor, **r.common())


def _read_plane_patch(r: _SpecReader):
    point = r.vector("point")
    axes = r.vectors("axes", 2, len(point))
    domain = r.domain("domain", 2, [ParameterRange(-1.0, 1.0), ParameterRange(-1.0, 1.0)])
    return PlanePatch(point, axes, domain, **r.common())


def _read_line(r: _SpecReader):
    point = r.vector("point")
    direction = r.vector("direction", len(point))
    if not any(direction):
        raise ValidationError("must be non-zero", "direction")
    domain = r.domain("domain", 1, [ParameterRange(-10.0, 10.0)])
    return Line(point, direction, domain, **r.common())


def _read_circle(r: _SpecReader):
    center = r.vector("center")
    if len(center) < 2:
        raise ValidationError("a circle needs at least two ambient dimensions", "center")
    axes = r.vectors("axes", 2, len(center), required=False)
    return Circle(center, r.number("radius", positive=True), axes, **r.common())


def _read_expression(r: _SpecReader):
    variables = r.strings("vars")
    components = r.strings("components")
    domain = r.domain("domain", len(variables))
    return ExpressionSurface(variables, components, domain, **r.common())


def _read_graph(r: _SpecReader):
    variables = r.strings("vars")
    function = r.string("function")
    domain = r.domain("domain", len(variables))
    return GraphSurface(variables, function, domain, **r.common())


SHAPES: Dict[str, Callable[[_SpecReader], SurfaceDefinition]] = {
    "sphere": _read_sphere,
    "ellipsoid": _read_ellipsoid,
    "torus": _read_torus,
    "plane-patch": _read_plane_patch,
    "line": _read_line,
    "circle": _read_circle,
    "graph": _read_graph,
    "expression": _read_expression,
}


def load_json(text: str) -> Any:
    """json.loads with decoder errors turned into ParseError."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno, loc=exc.pos) from None


def parse_surface_spec(text: Union[str, Mapping[str, Any]]) -> SurfaceDefinition:
    """
    Build a surface from a specification document.

    Args:
        text: JSON text of one surface object, or the already decoded mapping.

    Returns:
        The SurfaceDefinition described by the document.

    Raises:
        ParseError: the text is not valid JSON or not an object.
        ValidationError: unknown kind or field, wrong dimensions, non-positive
            shape parameters, malformed expressions' variables.
    """
    spec = load_json(text) if isinstance(text, str) else text
    if not isinstance(spec, Mapping):
        raise ParseError(f"surface specification must be an object, got {type(spec).__name__}")
    kind = spec.get("kind")
    if kind not in SHAPES:
        raise ValidationError(f"unknown kind {kind!r}; expected one of {sorted(SHAPES)}", "kind")
    reader = _SpecReader(spec)
    return reader.finish(SHAPES[kind](reader))


def format_surface_spec(surface: SurfaceDefinition) -> str:
    """Print a surface as a specification document accepted by parse_surface_spec."""
    return json.dumps(surface.to_spec())
