"""Shared fixtures for the surfdist test suite."""

import itertools
import math

import numpy as np
import pytest

from surfdist import (
    Circle,
    Ellipsoid,
    GraphSurface,
    Line,
    ParameterRange,
    PlanePatch,
    Sphere,
    Torus,
)
from surfdist.manifold import ExpressionSurface


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_spheres():
    """Unit spheres centred at the origin and at (4, 0, 0); distance 2."""
    return Sphere([0, 0, 0], 1.0), Sphere([4, 0, 0], 1.0)


@pytest.fixture
def skew_lines():
    """x = (t, 0, 0) and y = (0, s, 1); closest pair at t = s = 0, distance 1."""
    return Line([0, 0, 0], [1, 0, 0]), Line([0, 0, 1], [0, 1, 0])


def shape_catalog():
    """One instance of every surface kind, away from the others' positions."""
    return {
        "sphere": Sphere([0.5, -1.0, 1.0], 1.5),
        "sphere-x-pole": Sphere([0, 0, 0], 1.0, pole=[1, 0, 0]),
        "ellipsoid": Ellipsoid([0, 0, 0], [2.0, 1.0, 0.5]),
        "torus": Torus([0, 0, 0.5], 3.0, 0.5),
        "plane-patch": PlanePatch([0, 0, 1], [[1, 0, 0.5], [0, 1, -0.25]], [ParameterRange(-1, 1)] * 2),
        "line": Line([1, 1, 1], [1, 2, 2]),
        "circle": Circle([0, 0, 0, 1], 2.0, axes=[[1, 1, 0, 0], [0, 0, 1, 1]]),
        "graph": GraphSurface(["u", "v"], "u^2 - v^2 / 2", [ParameterRange(-1, 1)] * 2),
        "expression": ExpressionSurface(
            ["u", "v"],
            ["(2 + cos(v)) * cos(u)", "(2 + cos(v)) * sin(u)", "sin(v)"],
            [ParameterRange(0, 2 * math.pi, periodic=True)] * 2,
        ),
    }


BENCHMARKS = ["sphere_sphere", "line_sphere", "concentric_circles", "torus_sphere", "ellipsoid_sphere"]


def shape_pairs():
    """Every two catalog shapes sharing an ambient space, plus a pair of circles in R^4."""
    shapes = shape_catalog()
    pairs = [
        pytest.param(shapes[a], shapes[b], id=f"{a}-{b}")
        for a, b in itertools.combinations(shapes, 2)
        if shapes[a].ambient_dim == shapes[b].ambient_dim
    ]
    pairs.append(pytest.param(shapes["circle"], Circle([1, 0, 0, 0], 1.0), id="circle-circle"))
    return pairs


def random_params(surface, rng):
    """A parameter point away from clamped ends and chart singularities."""
    values = []
    for interval in surface.domain:
        inset = 0.0 if interval.periodic else 0.15 * interval.width
        values.append(rng.uniform(interval.lo + inset, interval.hi - inset))
    return np.array(values)
