"""
Damped natural mechanical dynamics on the product of two surfaces.

The configuration q = (ξ, η) stacks the parameters of a point on each
surface, v = dq/dt stacks their velocities. Kinetic energy comes from the
block product metric, potential energy U(r) from the distance between the
two points, and friction from a Rayleigh function R = ½ c g_ij v^i v^j.
The first-order field is

    dq/dt = v
    dv/dt = -Γ(q)[v, v] - g⁻¹ dU - g⁻¹ ∂R/∂v

and E = ½⟨v, v⟩_g + U decreases at rate 2R along its trajectories.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateSeparation, NonFiniteState, SingularMetric, ValidationError
from .geometry import ProductMetric, geodesic_coefficients, induced_metric, product_bundle
from .manifold import SurfaceDefinition, SurfaceJet

POTENTIAL_KINDS = ("harmonic", "power", "free")
# Below this separation only the harmonic force is defined
MIN_SEPARATION = 1e-14

Surfaces = Tuple[SurfaceDefinition, SurfaceDefinition]
Derivative = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True, eq=False)
class ProductState:
    """Stacked parameters, stacked velocities and elapsed time."""

    q: np.ndarray
    v: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(-1)
        v = np.asarray(self.v, dtype=float).reshape(-1)
        if q.shape != v.shape:
            raise ValidationError(f"q has {q.shape[0]} entries but v has {v.shape[0]}", "v")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def at_rest(cls, q, time: float = 0.0) -> "ProductState":
        q = np.asarray(q, dtype=float).reshape(-1)
        return cls(q, np.zeros_like(q), time)

    def replace(self, **changes) -> "ProductState":
        values = {"q": self.q, "v": self.v, "time": self.time}
        values.update(changes)
        return ProductState(**values)


@dataclass(frozen=True)
class Potential:
    """
    Attraction between the two points as a function of their distance r.

    harmonic: U = ½ k r²   (U'/r = k, defined at r = 0)
    power:    U = k r^p, p >= 1
    free:     U = 0        (geodesic motion, no attraction)
    """

    kind: str = "harmonic"
    stiffness: float = 1.0
    exponent: float = 2.0

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValidationError(
                f"unknown potential {self.kind!r}; expected one of {list(POTENTIAL_KINDS)}", "kind"
            )
        if self.kind != "free" and not self.stiffness > 0:
            raise ValidationError(f"must be positive, got {self.stiffness!r}", "stiffness")
        if self.kind == "power" and not self.exponent >= 1:
            raise ValidationError(f"must be at least 1, got {self.exponent!r}", "exponent")

    def value(self, r: float) -> float:
        if self.kind == "harmonic":
            return 0.5 * self.stiffness * r * r
        if self.kind == "power":
            return self.stiffness * r ** self.exponent
        return 0.0

    def slope_over_r(self, r: float) -> float:
        """U'(r) / r, the scalar prefactor of the pulled-back gradient."""
        if self.kind == "harmonic":
            return self.stiffness
        if self.kind == "free":
            return 0.0
        if r < MIN_SEPARATION:
            raise DegenerateSeparation(f"separation {r!r} too small for the {self.kind} potential")
        return self.stiffness * self.exponent * r ** (self.exponent - 2.0)


@dataclass(frozen=True)
class DissipationModel:
    """Metric-proportional damping: R_ij = c g_ij."""

    damping: float = 1.0

    def __post_init__(self):
        if not self.damping >= 0:
            raise ValidationError(f"must be non-negative, got {self.damping!r}", "damping")

    def rayleigh_matrix(self, metric: np.ndarray) -> np.ndarray:
        return self.damping * metric


class FieldEvaluation(NamedTuple):
    """Everything computed while evaluating the vector field at (q, v)."""

    q: np.ndarray
    v: np.ndarray
    jets: Tuple[SurfaceJet, SurfaceJet]
    bundle: ProductMetric
    separation: np.ndarray
    distance: float
    covector: np.ndarray
    gradient: np.ndarray
    geodesic: np.ndarray
    friction: np.ndarray
    acceleration: np.ndarray
    potential_energy: float

    @property
    def velocity_norm(self) -> float:
        return float(np.sqrt(max(self.bundle.inner(self.v, self.v), 0.0)))

    @property
    def gradient_norm(self) -> float:
        # ⟨∇U, ∇U⟩_g = dU · g⁻¹ dU
        return float(np.sqrt(max(float(self.covector @ self.gradient), 0.0)))

    @property
    def kinetic_energy(self) -> float:
        return 0.5 * self.bundle.inner(self.v, self.v)

    @property
    def energy(self) -> float:
        return self.kinetic_energy + self.potential_energy

    @property
    def derivative(self) -> Derivative:
        return self.v, self.acceleration


def _separation_from_jets(jet1: SurfaceJet, jet2: SurfaceJet) -> Tuple[np.ndarray, float]:
    r_vec = jet2.position - jet1.position
    return r_vec, float(np.linalg.norm(r_vec))


def _covector_from_jets(
    jet1: SurfaceJet, jet2: SurfaceJet, r_vec: np.ndarray, r: float, potential: Potential
) -> np.ndarray:
    prefactor = potential.slope_over_r(r)
    return np.concatenate(
        [-prefactor * (jet1.jacobian.T @ r_vec), prefactor * (jet2.jacobian.T @ r_vec)]
    )


def _stacked_metric(jets, masses) -> Tuple[np.ndarray, np.ndarray]:
    return induced_metric(jets[0], masses[0]), induced_metric(jets[1], masses[1])


def _block_inner(metrics, v: np.ndarray) -> float:
    n = metrics[0].shape[0]
    return float(v[:n] @ metrics[0] @ v[:n] + v[n:] @ metrics[1] @ v[n:])


class MechanicalSystem:
    """
    The damped mechanical system of two surfaces.

    Calling the system with (q, v) returns the derivative (dq, dv), so it can
    be handed directly to ``step_rk4``.

    Example:
        >>> system = MechanicalSystem(Sphere([0, 0, 0], 1), Sphere([4, 0, 0], 1))
        >>> dq, dv = system(np.array([np.pi / 2, 0.0, np.pi / 2, np.pi]), np.zeros(4))
    """

    def __init__(
        self,
        surface1: SurfaceDefinition,
        surface2: SurfaceDefinition,
        potential: Optional[Potential] = None,
        dissipation: Optional[DissipationModel] = None,
        masses: Optional[Sequence[float]] = None,
    ):
        if surface1.ambient_dim != surface2.ambient_dim:
            raise ValidationError(
                f"surfaces live in R^{surface1.ambient_dim} and R^{surface2.ambient_dim}",
                "ambient_dim",
            )
        self.surfaces: Surfaces = (surface1, surface2)
        self.potential = potential or Potential()
        self.dissipation = dissipation or DissipationModel()
        if masses is None:
            masses = (surface1.mass, surface2.mass)
        self.masses = (float(masses[0]), float(masses[1]))
        if min(self.masses) <= 0:
            raise ValidationError(f"must be positive, got {list(self.masses)}", "masses")
        self.dims = (surface1.param_dim, surface2.param_dim)

    @property
    def dim(self) -> int:
        return self.dims[0] + self.dims[1]

    def split(self, q) -> Tuple[np.ndarray, np.ndarray]:
        q = np.asarray(q, dtype=float)
        return q[: self.dims[0]], q[self.dims[0]:]

    def wrap(self, q) -> np.ndarray:
        xi, eta = self.split(q)
        return np.concatenate([self.surfaces[0].wrap(xi), self.surfaces[1].wrap(eta)])

    def jets(self, q) -> Tuple[SurfaceJet, SurfaceJet]:
        xi, eta = self.split(q)
        return self.surfaces[0].jet(xi), self.surfaces[1].jet(eta)

    def evaluate(self, q, v) -> FieldEvaluation:
        """
        Evaluate the vector field and its by-products at (q, v).

        Raises:
            SingularMetric: tagged with the surface index and the state q.
            DomainViolation: a clamped parameter left its interval.
        """
        q = np.asarray(q, dtype=float)
        v = np.asarray(v, dtype=float)
        s1, s2 = self.surfaces
        xi, eta = self.split(q)
        jets = self.jets(q)
        try:
            bundle = product_bundle(s1, xi, self.masses[0], s2, eta, self.masses[1], jets=jets)
        except SingularMetric as exc:
            raise exc.tagged(state=q.copy()) from None

        r_vec, r = _separation_from_jets(*jets)
        covector = _covector_from_jets(jets[0], jets[1], r_vec, r, self.potential)
        gradient = bundle.raise_index(covector)
        geodesic = geodesic_term(bundle, v)
        friction = rayleigh_force(bundle, self.dissipation, v)
        return FieldEvaluation(
            q=q,
            v=v,
            jets=jets,
            bundle=bundle,
            separation=r_vec,
            distance=r,
            covector=covector,
            gradient=gradient,
            geodesic=geodesic,
            friction=friction,
            acceleration=geodesic - gradient - friction,
            potential_energy=self.potential.value(r),
        )

    def __call__(self, q, v) -> Derivative:
        return self.evaluate(q, v).derivative

    def energy(self, q, v) -> float:
        """E = ½⟨v, v⟩_g + U(r), without the Christoffel symbols."""
        jets = self.jets(q)
        _, r = _separation_from_jets(*jets)
        return 0.5 * _block_inner(_stacked_metric(jets, self.masses), np.asarray(v, dtype=float)) + (
            self.potential.value(r)
        )

    def __repr__(self):
        return (
            f"MechanicalSystem({self.surfaces[0]!r}, {self.surfaces[1]!r}, "
            f"{self.potential!r}, {self.dissipation!r}, masses={self.masses!r})"
        )


def _system(surfaces: Surfaces, potential=None, dissipation=None, masses=None) -> MechanicalSystem:
    return MechanicalSystem(surfaces[0], surfaces[1], potential, dissipation, masses)


def separation(state: ProductState, surface1: SurfaceDefinition, surface2: SurfaceDefinition):
    """r⃗ = y(η) − x(ξ) and r = |r⃗|."""
    n = surface1.param_dim
    r_vec = surface2.evaluate(state.q[n:]) - surface1.evaluate(state.q[:n])
    return r_vec, float(np.linalg.norm(r_vec))


def potential_covector(state: ProductState, surfaces: Surfaces, potential: Potential) -> np.ndarray:
    """
    Covariant gradient dU of U(|y(η) − x(ξ)|) with respect to q.

    Raises:
        DegenerateSeparation: non-harmonic potential with r < 1e-14.
    """
    jets = _system(surfaces, potential).jets(state.q)
    r_vec, r = _separation_from_jets(*jets)
    return _covector_from_jets(jets[0], jets[1], r_vec, r, potential)


def geodesic_term(bundle: ProductMetric, v: np.ndarray) -> np.ndarray:
    """γ^a = −Γ^a_bc v^b v^c, one block per surface."""
    n = bundle.block1.dim
    return np.concatenate(
        [
            -np.einsum("abc,b,c->a", bundle.block1.christoffel_second, v[:n], v[:n]),
            -np.einsum("abc,b,c->a", bundle.block2.christoffel_second, v[n:], v[n:]),
        ]
    )


def rayleigh_force(bundle: ProductMetric, dissipation: DissipationModel, v: np.ndarray) -> np.ndarray:
    """F_R^i = g^ik ∂R/∂v^k with ∂R/∂v^k = R_kj v^j."""
    n = bundle.block1.dim
    parts = []
    for block, velocity in ((bundle.block1, v[:n]), (bundle.block2, v[n:])):
        covector = dissipation.rayleigh_matrix(block.metric) @ velocity
        parts.append(block.inverse @ covector)
    return np.concatenate(parts)


def vector_field(
    state: ProductState,
    surfaces: Surfaces,
    potential: Potential,
    dissipation: DissipationModel,
    masses: Optional[Sequence[float]] = None,
) -> Derivative:
    """(dq, dv) at ``state`` for the given surfaces and models."""
    return _system(surfaces, potential, dissipation, masses)(state.q, state.v)


def step_rk4(
    state: ProductState,
    field: Callable[[np.ndarray, np.ndarray], Derivative],
    dt: float,
    wrap: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    k1: Optional[Derivative] = None,
) -> ProductState:
    """
    One classical Runge-Kutta step of size dt.

    Args:
        state: current state.
        field: callable (q, v) -> (dq, dv); a MechanicalSystem works as is.
        dt: step size, positive.
        wrap: reduces periodic parameters after the step; defaults to
            ``field.wrap`` when the field has one.
        k1: the derivative at ``state`` when the caller already has it.

    Raises:
        NonFiniteState: the step produced NaN or infinity; carries ``state``.
    """
    if not dt > 0:
        raise ValidationError(f"must be positive, got {dt!r}", "dt")
    if wrap is None:
        wrap = getattr(field, "wrap", None)
    q, v = state.q, state.v
    half = 0.5 * dt

    dq1, dv1 = field(q, v) if k1 is None else k1
    dq2, dv2 = field(q + half * dq1, v + half * dv1)
    dq3, dv3 = field(q + half * dq2, v + half * dv2)
    dq4, dv4 = field(q + dt * dq3, v + dt * dv3)

    sixth = dt / 6.0
    q_new = q + sixth * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4)
    v_new = v + sixth * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4)
    if not (np.all(np.isfinite(q_new)) and np.all(np.isfinite(v_new))):
        raise NonFiniteState(f"non-finite state after step at t={state.time!r} (dt={dt!r})", state=state)
    if wrap is not None:
        q_new = wrap(q_new)
    return ProductState(q_new, v_new, state.time + dt)


def energy(
    state: ProductState,
    surfaces: Surfaces,
    potential: Potential,
    masses: Optional[Sequence[float]] = None,
) -> float:
    """E = ½ g_ij v^i v^j + U(r)."""
    return _system(surfaces, potential, masses=masses).energy(state.q, state.v)


def lyapunov(
    state: ProductState,
    surfaces: Surfaces,
    potential: Potential,
    masses: Optional[Sequence[float]],
    U0: float,
) -> float:
    """L = E − U0, zero at the equilibrium whose potential value is U0."""
    return energy(state, surfaces, potential, masses) - U0


def rayleigh(state: ProductState, system: MechanicalSystem) -> float:
    """R = ½ R_ij v^i v^j."""
    metrics = _stacked_metric(system.jets(state.q), system.masses)
    n = system.dims[0]
    v = state.v
    return 0.5 * float(
        v[:n] @ system.dissipation.rayleigh_matrix(metrics[0]) @ v[:n]
        + v[n:] @ system.dissipation.rayleigh_matrix(metrics[1]) @ v[n:]
    )


def momentum(state: ProductState, system: MechanicalSystem) -> np.ndarray:
    """Conjugate momentum p_i = g_ij v^j."""
    metrics = _stacked_metric(system.jets(state.q), system.masses)
    n = system.dims[0]
    return np.concatenate([metrics[0] @ state.v[:n], metrics[1] @ state.v[n:]])


def lagrange_residual(state: ProductState, system: MechanicalSystem) -> np.ndarray:
    """
    Residual of the second-order Lagrange equations in their raw form,

        g_ab a^b + m (∂_a x · ∂²_bc x) v^b v^c + ∂_a U + R_ab v^b,

    with a = dv/dt taken from the vector field. Zero up to round-off.
    """
    evaluation = system.evaluate(state.q, state.v)
    n = system.dims[0]
    parts = []
    blocks = (
        (evaluation.bundle.block1, evaluation.jets[0], system.masses[0], slice(0, n)),
        (evaluation.bundle.block2, evaluation.jets[1], system.masses[1], slice(n, None)),
    )
    for block, jet, mass, part in blocks:
        v = state.v[part]
        coefficients = geodesic_coefficients(jet, mass)
        parts.append(
            block.metric @ evaluation.acceleration[part]
            + np.einsum("bac,b,c->a", coefficients, v, v)
            + evaluation.covector[part]
            + system.dissipation.rayleigh_matrix(block.metric) @ v
        )
    return np.concatenate(parts)


def velocity_norm(state: ProductState, system: MechanicalSystem) -> float:
    """⟨v, v⟩_g^½."""
    metrics = _stacked_metric(system.jets(state.q), system.masses)
    return float(np.sqrt(max(_block_inner(metrics, state.v), 0.0)))


def gradient_norm(state: ProductState, system: MechanicalSystem) -> float:
    """g-norm of the potential gradient, ⟨∇U, ∇U⟩_g^½."""
    return system.evaluate(state.q, np.zeros_like(state.q)).gradient_norm
