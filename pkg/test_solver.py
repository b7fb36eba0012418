"""Tests for the single-start solver, multi-start driver and seeding."""

import dataclasses
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from surfdist import (
    AllStartsFailed,
    Line,
    ParameterRange,
    ProductState,
    SolverConfig,
    Sphere,
    ValidationError,
    load_problem,
    multi_start,
    solve,
)
from surfdist.solver import best_of, check_convergence, normal_deviation, seed_points

FAST = SolverConfig(dt=0.05, starts=4)
START = [1.2, 0.3, 1.9, 2.8]
FACING = [math.pi / 2, 0.0, math.pi / 2, math.pi]


def test_sphere_pair_from_given_start(unit_spheres):
    result = solve(unit_spheres, config=FAST, initial=START)
    assert result.converged
    assert result.distance == pytest.approx(2.0, abs=1e-6)
    a, b = result.closest_points
    assert result.distance == float(np.linalg.norm(b - a))
    assert a[0] == pytest.approx(1.0, abs=1e-6)
    assert b[0] == pytest.approx(3.0, abs=1e-6)
    assert normal_deviation(unit_spheres, result.minimizer) < 1e-5
    assert result.final_energy <= result.initial_energy
    assert result.velocity_norm <= FAST.tol_velocity
    assert result.final_gradient_norm <= FAST.tol_gradient
    assert not result.reseeded
    assert_array_equal(result.initial, START)


def test_line_above_sphere():
    line = Line([0, 0, 2], [1, 0, 0])
    ball = Sphere([0, 0, 0], 1.0, pole=[1, 0, 0])
    # start the sphere point on the upper side
    phi = max(np.linspace(0, 2 * math.pi, 64, endpoint=False), key=lambda p: ball.evaluate([1.2, p])[2])
    result = solve((line, ball), config=FAST, initial=[1.5, 1.2, phi])
    assert result.converged
    assert result.distance == pytest.approx(1.0, abs=1e-6)
    a, b = result.closest_points
    assert_allclose(a, [0, 0, 2], atol=1e-5)
    assert_allclose(b, [0, 0, 1], atol=1e-5)


def test_start_at_equilibrium_takes_no_steps(unit_spheres):
    config = FAST.replace(record_trajectory=True, sample_every=10)
    result = solve(unit_spheres, config=config, initial=FACING)
    assert result.converged
    assert result.steps_taken == 0
    assert len(result.trajectory) == 1
    assert result.distance == pytest.approx(2.0, abs=1e-15)


def test_step_cap_stops_without_convergence(unit_spheres):
    result = solve(unit_spheres, config=FAST.replace(max_steps=10), initial=START)
    assert not result.converged
    assert result.steps_taken == 10
    assert result.distance > 2.0


def test_trajectory_samples(unit_spheres):
    config = FAST.replace(record_trajectory=True, sample_every=25, max_steps=300)
    result = solve(unit_spheres, config=config, initial=START)
    times = [sample.time for sample in result.trajectory]
    assert times[0] == 0.0
    assert len(times) == 300 // 25 + 1
    assert times[-1] == pytest.approx(300 * 0.05)
    energies = [sample.energy for sample in result.trajectory]
    assert all(later <= earlier + 1e-12 for earlier, later in zip(energies, energies[1:]))
    assert result.trajectory[0].r == pytest.approx(
        float(np.linalg.norm(unit_spheres[1].evaluate(START[2:]) - unit_spheres[0].evaluate(START[:2])))
    )


def test_convergence_thresholds_are_inclusive(skew_lines):
    state = ProductState([0.3, 0.4], [0.1, 0.2])
    system = FAST.system(skew_lines)
    evaluation = system.evaluate(state.q, state.v)
    speed, slope = evaluation.velocity_norm, evaluation.gradient_norm
    exact = FAST.replace(tol_velocity=speed, tol_gradient=slope)
    potential = FAST.potential_model()
    assert check_convergence(state, skew_lines, potential, exact)
    tight_velocity = exact.replace(tol_velocity=float(np.nextafter(speed, 0.0)))
    assert not check_convergence(state, skew_lines, potential, tight_velocity)
    tight_gradient = exact.replace(tol_gradient=float(np.nextafter(slope, 0.0)))
    assert not check_convergence(state, skew_lines, potential, tight_gradient)


def test_singular_start_is_reseeded(unit_spheres):
    pole = [0.0, 0.0, math.pi / 2, math.pi]
    result = solve(unit_spheres, config=FAST, initial=pole)
    assert result.reseeded
    assert not np.array_equal(result.initial, pole)
    assert result.converged
    assert result.distance == pytest.approx(2.0, abs=1e-6)


def test_initial_must_match_dimension(unit_spheres):
    with pytest.raises(ValidationError) as info:
        solve(unit_spheres, config=FAST, initial=[1.0, 2.0, 3.0])
    assert info.value.field == "initial"


def test_multi_start_sphere_pair(unit_spheres):
    result = multi_start(unit_spheres, config=FAST)
    assert result.converged
    assert result.distance == pytest.approx(2.0, abs=1e-6)
    assert 0 <= result.start_index < FAST.starts


@pytest.mark.parametrize(
    "name, expected",
    [
        ("sphere_sphere", 2.0),
        ("torus_sphere", 5.5),
        ("ellipsoid_sphere", 3.0),
        ("concentric_circles", 2.0),
        ("line_sphere", 1.0),
    ],
)
def test_builtin_benchmarks(name, expected):
    problem = load_problem(f"builtin:{name}")
    result = multi_start(problem.surfaces, config=problem.config)
    assert result.converged
    assert result.distance == pytest.approx(expected, abs=1e-6)
    assert normal_deviation(problem.surfaces, result.minimizer) < 1e-5


def test_parallel_segments_settle_on_the_continuum():
    domain = [ParameterRange(-5.0, 5.0)]
    segments = Line([0, 0, 0], [1, 0, 0], domain), Line([0, 1.5, 0], [1, 0, 0], domain)
    result = multi_start(segments, config=FAST)
    assert result.converged
    assert result.distance == pytest.approx(1.5, abs=1e-6)
    assert -5.0 <= result.minimizer[0] <= 5.0
    assert result.minimizer[0] == pytest.approx(result.minimizer[1], abs=1e-6)


def test_multi_start_is_deterministic(unit_spheres):
    config = FAST.replace(starts=3, seed=7)
    first = multi_start(unit_spheres, config=config)
    second = multi_start(unit_spheres, config=config)
    assert first.distance == second.distance
    assert_array_equal(first.minimizer, second.minimizer)
    assert first.start_index == second.start_index


def test_worker_count_does_not_change_the_answer(unit_spheres):
    config = FAST.replace(starts=3, seed=3)
    serial = multi_start(unit_spheres, config=config)
    threaded = multi_start(unit_spheres, config=config.replace(workers=2))
    assert serial.distance == threaded.distance
    assert_array_equal(serial.minimizer, threaded.minimizer)
    assert serial.start_index == threaded.start_index


def test_all_starts_failing_keeps_results(unit_spheres):
    with pytest.raises(AllStartsFailed) as info:
        multi_start(unit_spheres, config=FAST.replace(max_steps=5, starts=3))
    outcome = info.value
    assert len(outcome.results) + len(outcome.failures) == 3
    assert outcome.results
    assert not any(r.converged for r in outcome.results)
    assert best_of(outcome.results).distance == min(r.distance for r in outcome.results)


def test_ranking_prefers_distance_then_energy_then_index(unit_spheres):
    base = solve(unit_spheres, config=FAST.replace(max_steps=0), initial=START)
    later = dataclasses.replace(base, start_index=3)
    lower_energy = dataclasses.replace(base, start_index=5, final_energy=base.final_energy - 1.0)
    closer = dataclasses.replace(base, start_index=9, distance=base.distance - 1e-3)
    assert best_of([later, base]) is base
    assert best_of([base, lower_energy]) is lower_energy
    assert best_of([base, lower_energy, closer]) is closer


def test_seed_points_cover_the_box(unit_spheres):
    points = seed_points(unit_spheres, 16, seed=5)
    assert points.shape == (16, 4)
    assert_array_equal(points, seed_points(unit_spheres, 16, seed=5))
    assert not np.array_equal(points, seed_points(unit_spheres, 16, seed=6))
    theta = points[:, [0, 2]]
    phi = points[:, [1, 3]]
    assert (theta >= 0.01 * math.pi).all() and (theta <= math.pi - 0.01 * math.pi).all()
    assert (phi >= 0.0).all() and (phi < 2 * math.pi).all()


def test_record_layout(unit_spheres):
    record = solve(unit_spheres, config=FAST, initial=START).to_record()
    assert set(record) == {
        "converged",
        "distance",
        "closest_point_a",
        "closest_point_b",
        "minimizer",
        "initial",
        "steps",
        "final_energy",
        "initial_energy",
        "final_gradient_norm",
        "velocity_norm",
        "seed",
        "start_index",
        "reseeded",
    }
    assert len(record["closest_point_a"]) == 3
    assert record["initial"] == START


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"dt": 0.0}, "dt"),
        ({"damping": -1.0}, "damping"),
        ({"potential": "free"}, "potential"),
        ({"potential": "power", "exponent": 0.5}, "exponent"),
        ({"masses": (1.0,)}, "masses"),
        ({"masses": (1.0, 0.0)}, "masses"),
        ({"max_steps": -1}, "max_steps"),
        ({"starts": 0}, "starts"),
        ({"workers": 0}, "workers"),
        ({"seed": 1.5}, "seed"),
        ({"sample_every": True}, "sample_every"),
        ({"tol_velocity": "1e-8"}, "tol_velocity"),
    ],
)
def test_invalid_config(overrides, field):
    with pytest.raises(ValidationError) as info:
        SolverConfig(**overrides)
    assert info.value.field == field


def test_replace_ignores_missing_overrides():
    config = SolverConfig(dt=0.01)
    assert config.replace(dt=None, starts=None) == config
    assert config.replace(starts=2).starts == 2
    assert SolverConfig(masses=[1, 2]).masses == (1.0, 2.0)
