"""
Independent checks for the solver: an exhaustive grid search for the
minimum distance and a finite-difference check of the potential gradient.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .dynamics import Potential, ProductState, Surfaces, potential_covector
from .errors import CapExceeded, ValidationError
from .manifold import ParameterRange, SurfaceDefinition

logger = logging.getLogger(__name__)

# Must admit 200 samples per parameter on two 2-D surfaces (1.6e9 pairs), so not 1e8
DEFAULT_CAP = 1e10
# Pairwise distance blocks hold at most this many entries
CHUNK_ENTRIES = 4_000_000
# Below this gradient size fd_gradient_check reports absolute error
ABSOLUTE_SWITCH = 1e-8


@dataclass(frozen=True)
class GridAxis:
    """Samples along one parameter."""

    interval: ParameterRange
    count: int

    def __post_init__(self):
        if isinstance(self.count, bool) or not isinstance(self.count, int) or self.count < 1:
            raise ValidationError(f"expected a positive integer, got {self.count!r}", "count")

    def samples(self) -> np.ndarray:
        lo, width = self.interval.lo, self.interval.width
        if self.count == 1:
            return np.array([lo + 0.5 * width])
        if self.interval.periodic:
            return lo + width * np.arange(self.count) / self.count
        return np.linspace(lo, self.interval.hi, self.count)

    def hull(self) -> np.ndarray:
        """Samples plus the points that close every gap up to the interval ends."""
        samples = self.samples()
        if self.count == 1:
            return np.array([self.interval.lo, samples[0], self.interval.hi])
        if self.interval.periodic:
            return np.append(samples, samples[0] + self.interval.width)
        return samples

    def refined(self) -> "GridAxis":
        """Twice the intervals; every current sample stays a sample."""
        if self.interval.periodic:
            return GridAxis(self.interval, 2 * self.count)
        return GridAxis(self.interval, 3 if self.count == 1 else 2 * self.count - 1)


def _mesh(axes: Sequence[np.ndarray]) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


@dataclass(frozen=True)
class GridSpec:
    """Sampling of both parameter boxes and the pair-evaluation cap."""

    axes1: Tuple[GridAxis, ...]
    axes2: Tuple[GridAxis, ...]
    cap: float = DEFAULT_CAP

    def __post_init__(self):
        object.__setattr__(self, "axes1", tuple(self.axes1))
        object.__setattr__(self, "axes2", tuple(self.axes2))
        if not self.axes1 or not self.axes2:
            raise ValidationError("both surfaces need at least one axis", "axes")
        if not self.cap > 0:
            raise ValidationError(f"must be positive, got {self.cap!r}", "cap")

    @classmethod
    def from_counts(
        cls,
        surface1: SurfaceDefinition,
        surface2: SurfaceDefinition,
        counts1: Sequence[int],
        counts2: Sequence[int],
        cap: float = DEFAULT_CAP,
    ) -> "GridSpec":
        axes = []
        for label, surface, counts in (("counts_a", surface1, counts1), ("counts_b", surface2, counts2)):
            counts = list(counts)
            if len(counts) != surface.param_dim:
                raise ValidationError(
                    f"expected {surface.param_dim} counts, got {len(counts)}", label
                )
            try:
                axes.append(tuple(GridAxis(r, c) for r, c in zip(surface.domain, counts)))
            except ValidationError as exc:
                raise exc.within(label) from None
        return cls(axes[0], axes[1], cap)

    @classmethod
    def uniform(
        cls,
        surface1: SurfaceDefinition,
        surface2: SurfaceDefinition,
        per_axis: int,
        cap: float = DEFAULT_CAP,
    ) -> "GridSpec":
        return cls.from_counts(
            surface1, surface2, [per_axis] * surface1.param_dim, [per_axis] * surface2.param_dim, cap
        )

    @property
    def sizes(self) -> Tuple[int, int]:
        return (
            math.prod(a.count for a in self.axes1),
            math.prod(a.count for a in self.axes2),
        )

    @property
    def pairs(self) -> int:
        k1, k2 = self.sizes
        return k1 * k2

    def points1(self) -> np.ndarray:
        return _mesh([a.samples() for a in self.axes1])

    def points2(self) -> np.ndarray:
        return _mesh([a.samples() for a in self.axes2])

    def refined(self) -> "GridSpec":
        return GridSpec(
            tuple(a.refined() for a in self.axes1),
            tuple(a.refined() for a in self.axes2),
            self.cap,
        )


@dataclass(frozen=True, eq=False)
class GridResult:
    distance: float
    params1: np.ndarray
    params2: np.ndarray
    resolution: float
    lipschitz: float
    pairs: int

    def to_record(self) -> Dict[str, Any]:
        return {
            "distance": self.distance,
            "params_a": self.params1.tolist(),
            "params_b": self.params2.tolist(),
            "resolution": self.resolution,
            "lipschitz": self.lipschitz,
            "pairs": self.pairs,
        }


def _cell_bounds(surface: SurfaceDefinition, axes: Sequence[GridAxis]) -> Tuple[float, float]:
    """Largest cell diagonal in R^N and largest chord per unit parameter step."""
    hulls = [a.hull() for a in axes]
    positions = surface.evaluate_many(_mesh(hulls)).reshape(
        tuple(len(h) for h in hulls) + (surface.ambient_dim,)
    )
    squared = 0.0
    slope = 0.0
    for a, hull in enumerate(hulls):
        if len(hull) < 2:
            continue
        chords = np.linalg.norm(np.diff(positions, axis=a), axis=-1)
        steps = np.diff(hull).reshape((-1,) + (1,) * (len(hulls) - a - 1))
        longest = float(chords.max())
        squared += longest * longest
        slope = max(slope, float((chords / steps).max()))
    return math.sqrt(squared), slope


def grid_min_distance(
    surface1: SurfaceDefinition, surface2: SurfaceDefinition, grid: GridSpec
) -> GridResult:
    """
    Exhaustive minimum of |y(η_j) − x(ξ_i)| over the product grid.

    The returned distance over-approximates the true minimum by at most
    ``resolution``, the sum of the largest cell diagonals of the two
    sampled surfaces.

    Raises:
        CapExceeded: the grid needs more than ``grid.cap`` pair evaluations.
    """
    pairs = grid.pairs
    if pairs > grid.cap:
        raise CapExceeded(pairs, grid.cap)
    logger.info("grid oracle: %d x %d samples, %.3e pairs", *grid.sizes, float(pairs))

    params1, params2 = grid.points1(), grid.points2()
    X = surface1.evaluate_many(params1)
    Y = surface2.evaluate_many(params2)
    sq_x = np.einsum("ij,ij->i", X, X)
    sq_y = np.einsum("ij,ij->i", Y, Y)
    # expanded |a|^2 + |b|^2 - 2ab loses this much to cancellation
    slack = 64.0 * np.finfo(float).eps * (float(sq_x.max()) + float(sq_y.max()))

    best = (math.inf, 0, 0)
    rows = max(1, CHUNK_ENTRIES // Y.shape[0])
    for start in range(0, X.shape[0], rows):
        block = sq_x[start:start + rows, None] + sq_y[None, :] - 2.0 * (X[start:start + rows] @ Y.T)
        lowest = float(block.min())
        for i, j in zip(*np.nonzero(block <= lowest + slack)):
            d = float(np.linalg.norm(Y[j] - X[start + i]))
            if d < best[0]:
                best = (d, start + int(i), int(j))

    distance, i, j = best
    diag1, slope1 = _cell_bounds(surface1, grid.axes1)
    diag2, slope2 = _cell_bounds(surface2, grid.axes2)
    return GridResult(
        distance=distance,
        params1=params1[i],
        params2=params2[j],
        resolution=diag1 + diag2,
        lipschitz=max(slope1, slope2),
        pairs=pairs,
    )


def fd_gradient_check(
    surfaces: Surfaces,
    potential: Potential,
    state: ProductState,
    h: float = 1e-6,
) -> float:
    """
    Worst discrepancy between the analytic potential gradient and central
    differences of q -> U(|y(η) − x(ξ)|).

    The error is relative to the largest gradient component, or absolute
    when that component is below 1e-8.
    """
    analytic = potential_covector(state, surfaces, potential)
    n = surfaces[0].param_dim

    def composed(q: np.ndarray) -> float:
        r = float(np.linalg.norm(surfaces[1].evaluate(q[n:]) - surfaces[0].evaluate(q[:n])))
        return potential.value(r)

    q = state.q
    numeric = np.empty_like(analytic)
    for i in range(q.shape[0]):
        e = np.zeros_like(q)
        e[i] = h
        numeric[i] = (composed(q + e) - composed(q - e)) / (2.0 * h)

    error = float(np.max(np.abs(analytic - numeric)))
    scale = float(np.max(np.abs(analytic)))
    return error if scale < ABSOLUTE_SWITCH else error / scale
