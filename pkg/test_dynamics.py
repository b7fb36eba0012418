"""Tests for the damped vector field, the integrator and the energy diagnostics."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from conftest import BENCHMARKS, random_params, shape_catalog, shape_pairs
from surfdist import (
    DegenerateSeparation,
    DissipationModel,
    MechanicalSystem,
    NonFiniteState,
    Potential,
    ProductState,
    SingularMetric,
    Sphere,
    ValidationError,
    energy,
    load_problem,
    lyapunov,
    step_rk4,
    vector_field,
)
from surfdist.dynamics import (
    geodesic_term,
    gradient_norm,
    lagrange_residual,
    momentum,
    potential_covector,
    rayleigh,
    rayleigh_force,
    separation,
    velocity_norm,
)
from surfdist.geometry import product_bundle

FACING = [math.pi / 2, 0.0, math.pi / 2, math.pi]


def test_separation_of_facing_points(unit_spheres):
    a, b = unit_spheres
    state = ProductState.at_rest(FACING)
    r_vec, r = separation(state, a, b)
    assert_allclose(r_vec, [2, 0, 0], atol=1e-15)
    assert r == pytest.approx(2.0, abs=1e-15)
    swapped = ProductState.at_rest(FACING[2:] + FACING[:2])
    assert_allclose(separation(swapped, b, a)[0], -r_vec, atol=1e-15)


def test_covector_vanishes_where_separation_is_normal(unit_spheres):
    covector = potential_covector(ProductState.at_rest(FACING), unit_spheres, Potential())
    assert_allclose(covector, 0.0, atol=1e-12)


def test_covector_is_linear_in_stiffness(unit_spheres):
    state = ProductState.at_rest([1.2, 0.3, 1.9, 2.8])
    soft = potential_covector(state, unit_spheres, Potential(stiffness=1.0))
    stiff = potential_covector(state, unit_spheres, Potential(stiffness=2.0))
    assert_allclose(stiff, 2.0 * soft, rtol=1e-14)
    assert np.abs(soft).max() > 0.1


def test_covector_on_skew_lines(skew_lines):
    # r = (-t, s, 1), so dU = k (t, s)
    state = ProductState.at_rest([0.7, -0.4])
    covector = potential_covector(state, skew_lines, Potential(stiffness=3.0))
    assert_allclose(covector, [2.1, -1.2], atol=1e-15)


def test_power_potential_needs_separated_points():
    touching = (Sphere([0, 0, 0], 1.0), Sphere([2, 0, 0], 1.0))
    state = ProductState.at_rest(FACING)
    with pytest.raises(DegenerateSeparation):
        potential_covector(state, touching, Potential("power", exponent=4.0))
    assert_allclose(potential_covector(state, touching, Potential()), 0.0, atol=1e-15)


def test_potential_values():
    assert Potential(stiffness=2.0).value(3.0) == 9.0
    assert Potential("power", stiffness=0.5, exponent=3.0).value(2.0) == 4.0
    assert Potential("free").value(5.0) == 0.0
    assert Potential(stiffness=2.0).slope_over_r(0.0) == 2.0
    assert Potential("power", exponent=1.0).slope_over_r(2.0) == 0.5


def _bundle(surfaces, q, masses=(1.0, 1.0)):
    a, b = surfaces
    n = a.param_dim
    return product_bundle(a, q[:n], masses[0], b, q[n:], masses[1])


def test_geodesic_term_is_quadratic_in_velocity(unit_spheres):
    bundle = _bundle(unit_spheres, [1.1, 0.4, 2.0, 3.5])
    assert not geodesic_term(bundle, np.zeros(4)).any()
    v = np.array([0.3, -0.5, 0.2, 0.7])
    assert_allclose(geodesic_term(bundle, 2.0 * v), 4.0 * geodesic_term(bundle, v), rtol=1e-15)
    assert np.abs(geodesic_term(bundle, v)).max() > 0.01


def test_geodesic_term_vanishes_on_flat_surfaces(skew_lines):
    bundle = _bundle(skew_lines, [0.5, -1.5])
    assert not geodesic_term(bundle, np.array([3.0, -2.0])).any()


def test_rayleigh_force_is_proportional_to_velocity(unit_spheres):
    bundle = _bundle(unit_spheres, [1.1, 0.4, 2.0, 3.5])
    v = np.array([1.0, 0.0, 0.0, 0.0])
    force = rayleigh_force(bundle, DissipationModel(0.5), v)
    assert_allclose(force, [0.5, 0, 0, 0], atol=1e-15)


def test_rayleigh_power_balance(unit_spheres, rng):
    system = MechanicalSystem(*unit_spheres, dissipation=DissipationModel(0.8), masses=(1.0, 2.5))
    state = ProductState([1.1, 0.4, 2.0, 3.5], rng.normal(size=4))
    bundle = _bundle(unit_spheres, state.q, system.masses)
    force = rayleigh_force(bundle, system.dissipation, state.v)
    assert bundle.inner(state.v, force) == pytest.approx(2.0 * rayleigh(state, system), rel=1e-12)


def test_equilibrium_is_a_fixed_point_of_the_step(skew_lines):
    system = MechanicalSystem(*skew_lines)
    state = ProductState.at_rest([0.0, 0.0])
    dq, dv = vector_field(state, skew_lines, Potential(), DissipationModel())
    assert not dq.any() and not dv.any()
    after = step_rk4(state, system, 0.05)
    assert_array_equal(after.q, state.q)
    assert_array_equal(after.v, state.v)
    assert after.time == 0.05


def test_zero_field_only_advances_time():
    state = ProductState([1.0, 2.0], [0.0, 0.0], time=1.5)
    after = step_rk4(state, lambda q, v: (np.zeros_like(q), np.zeros_like(v)), 0.25)
    assert_array_equal(after.q, state.q)
    assert after.time == 1.75


def test_non_finite_step_reports_previous_state():
    state = ProductState([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(NonFiniteState) as info:
        step_rk4(state, lambda q, v: (np.full_like(q, np.inf), v), 0.1)
    assert info.value.state is state


@pytest.mark.parametrize("dt", [0.0, -0.1])
def test_step_size_must_be_positive(dt):
    with pytest.raises(ValidationError):
        step_rk4(ProductState.at_rest([0.0]), lambda q, v: (v, -q), dt)


def test_supplied_first_stage_is_used(skew_lines):
    system = MechanicalSystem(*skew_lines)
    state = ProductState([0.5, -0.3], [0.1, 0.2])
    plain = step_rk4(state, system, 0.1)
    reused = step_rk4(state, system, 0.1, k1=system(state.q, state.v))
    assert_array_equal(plain.q, reused.q)
    assert_array_equal(plain.v, reused.v)


def _damped_oscillator(x0, t):
    """t'' = -t - t' from rest; the skew-lines system with k = c = 1."""
    omega = math.sqrt(3.0) / 2.0
    return x0 * math.exp(-t / 2) * (math.cos(omega * t) + math.sin(omega * t) / (2 * omega))


def _final_error(system, q0, dt, total):
    state = ProductState.at_rest(q0)
    for _ in range(round(total / dt)):
        state = step_rk4(state, system, dt)
    exact = [_damped_oscillator(x, total) for x in q0]
    return float(np.linalg.norm(state.q - exact))


def test_integrator_is_fourth_order(skew_lines):
    system = MechanicalSystem(*skew_lines)
    coarse = _final_error(system, [0.5, -0.3], 0.1, 2.0)
    fine = _final_error(system, [0.5, -0.3], 0.05, 2.0)
    assert 1e-12 < fine < coarse < 1e-4
    assert 12.0 <= coarse / fine <= 20.0


def test_energy_decreases_along_damped_trajectory(unit_spheres):
    system = MechanicalSystem(*unit_spheres, dissipation=DissipationModel(0.6))
    state = ProductState([1.2, 0.3, 1.9, 2.8], [0.3, -0.2, 0.1, 0.4])
    previous = system.energy(state.q, state.v)
    for _ in range(500):
        state = step_rk4(state, system, 1e-3)
        current = system.energy(state.q, state.v)
        assert current <= previous + 1e-9
        previous = current
        assert 0.5 <= state.q[0] <= math.pi - 0.5
        assert 0.5 <= state.q[2] <= math.pi - 0.5


def test_energy_loss_rate_matches_rayleigh_dissipation(unit_spheres):
    system = MechanicalSystem(*unit_spheres, dissipation=DissipationModel(0.6))
    state = ProductState([1.2, 0.3, 1.9, 2.8], [0.3, -0.2, 0.1, 0.4])
    dt = 1e-3
    after = step_rk4(state, system, dt)
    middle = step_rk4(state, system, dt / 2)
    rate = (system.energy(after.q, after.v) - system.energy(state.q, state.v)) / dt
    expected = -2.0 * rayleigh(middle, system)
    assert abs(rate - expected) <= 1e-3 * abs(expected)


def _moving_state(surface1, surface2, system, rng, speed=1.0):
    q = np.concatenate([random_params(surface1, rng), random_params(surface2, rng)])
    v = rng.normal(size=q.shape[0])
    v *= speed / velocity_norm(ProductState(q, v), system)
    return ProductState(q, v)


@pytest.mark.parametrize("name", BENCHMARKS)
def test_energy_never_increases_on_benchmarks(name, rng):
    surfaces = load_problem(f"builtin:{name}").surfaces
    system = MechanicalSystem(*surfaces, dissipation=DissipationModel(0.8))
    for _ in range(20):
        state = _moving_state(*surfaces, system, rng, speed=rng.uniform(0.0, 2.0))
        previous = system.energy(state.q, state.v)
        for _ in range(60):
            state = step_rk4(state, system, 5e-4)
            current = system.energy(state.q, state.v)
            assert current <= previous + 1e-9
            previous = current


@pytest.mark.parametrize("surface1, surface2", shape_pairs())
def test_dissipation_rate_on_every_shape_pair(surface1, surface2, rng):
    system = MechanicalSystem(surface1, surface2, dissipation=DissipationModel(0.6))
    dt = 1e-4
    for _ in range(100):
        state = _moving_state(surface1, surface2, system, rng)
        after = step_rk4(state, system, dt)
        middle = step_rk4(state, system, dt / 2)
        rate = (system.energy(after.q, after.v) - system.energy(state.q, state.v)) / dt
        expected = -2.0 * rayleigh(middle, system)
        assert abs(rate - expected) <= 1e-3 * abs(expected)


@pytest.mark.parametrize("damping", [0.0, 0.7])
def test_lagrange_equations_hold(damping, rng):
    shapes = shape_catalog()
    system = MechanicalSystem(
        shapes["ellipsoid"],
        shapes["torus"],
        Potential(stiffness=1.3),
        DissipationModel(damping),
        masses=(1.0, 0.4),
    )
    for _ in range(10):
        q = np.array(
            [rng.uniform(0.5, 2.6), rng.uniform(0, 6), rng.uniform(0, 6), rng.uniform(0, 6)]
        )
        state = ProductState(q, rng.normal(size=4))
        assert_allclose(lagrange_residual(state, system), 0.0, atol=1e-9)


def test_free_motion_follows_great_circle():
    sphere = Sphere([0, 0, 0], 1.0)
    system = MechanicalSystem(
        sphere, Sphere([4, 0, 0], 1.0), Potential("free"), DissipationModel(0.0)
    )
    state = ProductState([math.pi / 2, 0.0, math.pi / 2, math.pi], [1.0, 1.0, 0.0, 0.0])
    x0 = sphere.evaluate(state.q[:2])
    tangent = sphere.jet(state.q[:2]).jacobian @ state.v[:2]
    normal = np.cross(x0, tangent)
    normal /= np.linalg.norm(normal)
    speed = velocity_norm(state, system)
    assert speed == pytest.approx(math.sqrt(2.0))
    for _ in range(2000):
        state = step_rk4(state, system, 5e-3)
    x = sphere.evaluate(state.q[:2])
    assert abs(float(x @ normal)) < 1e-6
    assert velocity_norm(state, system) == pytest.approx(speed, abs=1e-6)
    assert_array_equal(state.q[2:], [math.pi / 2, math.pi])
    assert 0.0 <= state.q[1] < 2 * math.pi


def test_energy_and_lyapunov(unit_spheres):
    potential = Potential()
    rest = ProductState.at_rest(FACING)
    assert energy(rest, unit_spheres, potential) == pytest.approx(2.0)
    moving = rest.replace(v=[1.0, 0.0, 0.0, 0.0])
    assert energy(moving, unit_spheres, potential) == pytest.approx(2.5)
    assert energy(moving, unit_spheres, potential, masses=(3.0, 1.0)) == pytest.approx(3.5)
    assert lyapunov(rest, unit_spheres, potential, None, 2.0) == pytest.approx(0.0, abs=1e-14)
    assert lyapunov(moving, unit_spheres, potential, None, 2.0) > 0.0
    elsewhere = ProductState.at_rest([1.2, 0.3, 1.9, 2.8])
    assert lyapunov(elsewhere, unit_spheres, potential, None, 2.0) > 0.0


def test_field_evaluation_energy_matches_system_energy(unit_spheres, rng):
    system = MechanicalSystem(*unit_spheres, masses=(1.5, 0.5))
    q, v = np.array([1.2, 0.3, 1.9, 2.8]), rng.normal(size=4)
    evaluation = system.evaluate(q, v)
    assert evaluation.energy == pytest.approx(system.energy(q, v), rel=1e-14)
    assert evaluation.distance == pytest.approx(separation(ProductState(q, v), *unit_spheres)[1])


def test_momentum_on_unit_speed_lines(skew_lines):
    system = MechanicalSystem(*skew_lines)
    state = ProductState([0.2, 0.4], [1.5, -0.5])
    assert_array_equal(momentum(state, system), state.v)


def test_gradient_norm_on_skew_lines(skew_lines):
    system = MechanicalSystem(*skew_lines, potential=Potential(stiffness=2.0))
    state = ProductState([0.3, 0.4], [9.0, 9.0])
    assert gradient_norm(state, system) == pytest.approx(1.0)


def test_singular_metric_reports_surface_and_state(unit_spheres):
    system = MechanicalSystem(*unit_spheres)
    q = np.array([0.0, 0.0, math.pi / 2, math.pi])
    with pytest.raises(SingularMetric) as info:
        system.evaluate(q, np.zeros(4))
    assert info.value.surface == 1
    assert_array_equal(info.value.state, q)


@pytest.mark.parametrize(
    "build, field",
    [
        (lambda: Potential("cubic"), "kind"),
        (lambda: Potential(stiffness=0.0), "stiffness"),
        (lambda: Potential("power", exponent=0.5), "exponent"),
        (lambda: DissipationModel(-1.0), "damping"),
        (lambda: ProductState([0.0, 0.0], [0.0]), "v"),
        (lambda: MechanicalSystem(Sphere([0, 0, 0], 1.0), shape_catalog()["circle"]), "ambient_dim"),
        (lambda: MechanicalSystem(Sphere([0, 0, 0], 1.0), Sphere([3, 0, 0], 1.0), masses=(0, 1)), "masses"),
    ],
)
def test_invalid_models(build, field):
    with pytest.raises(ValidationError) as info:
        build()
    assert info.value.field == field
