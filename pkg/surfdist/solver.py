"""
Minimum-distance solver: integrate the damped dynamics until the pair of
points comes to rest at a common normal, from one or many starting points.
"""

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import qmc

from .dynamics import (
    DissipationModel,
    FieldEvaluation,
    MechanicalSystem,
    Potential,
    ProductState,
    Surfaces,
    step_rk4,
)
from .errors import (
    AllStartsFailed,
    DomainViolation,
    GeometryError,
    SingularMetric,
    SolverError,
    ValidationError,
)

logger = logging.getLogger(__name__)

SOLVER_POTENTIALS = ("harmonic", "power")
# Clamped parameters are seeded this fraction of their width away from the ends
SEED_INSET = 0.01
MAX_SEED_DRAWS = 100
INTEGER_MINIMUMS = {"max_steps": 0, "starts": 1, "seed": 0, "workers": 1, "sample_every": 1}


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class SolverConfig:
    """Integration, convergence and multi-start settings."""

    dt: float = 1e-3
    damping: float = 1.0
    stiffness: float = 1.0
    potential: str = "harmonic"
    exponent: float = 2.0
    masses: Optional[Tuple[float, float]] = None
    tol_velocity: float = 1e-8
    tol_gradient: float = 1e-8
    max_steps: int = 2_000_000
    starts: int = 8
    seed: int = 0
    workers: int = 1
    record_trajectory: bool = False
    sample_every: int = 100

    def __post_init__(self):
        for name in ("dt", "damping", "stiffness", "tol_velocity", "tol_gradient"):
            value = getattr(self, name)
            if not _is_number(value) or not value > 0:
                raise ValidationError(f"must be a positive number, got {value!r}", name)
        if self.potential not in SOLVER_POTENTIALS:
            raise ValidationError(
                f"expected one of {list(SOLVER_POTENTIALS)}, got {self.potential!r}", "potential"
            )
        if not _is_number(self.exponent) or not self.exponent >= 1:
            raise ValidationError(f"must be a number >= 1, got {self.exponent!r}", "exponent")
        if self.masses is not None:
            masses = self.masses
            if (
                not isinstance(masses, (list, tuple))
                or len(masses) != 2
                or not all(_is_number(m) and m > 0 for m in masses)
            ):
                raise ValidationError(f"expected two positive masses, got {masses!r}", "masses")
            object.__setattr__(self, "masses", (float(masses[0]), float(masses[1])))
        for name, minimum in INTEGER_MINIMUMS.items():
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
                raise ValidationError(f"expected an integer >= {minimum}, got {value!r}", name)

    def replace(self, **overrides) -> "SolverConfig":
        """Copy with the given fields changed; ``None`` values are ignored."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def potential_model(self) -> Potential:
        return Potential(self.potential, self.stiffness, self.exponent)

    def dissipation_model(self) -> DissipationModel:
        return DissipationModel(self.damping)

    def system(self, surfaces: Surfaces, potential: Optional[Potential] = None) -> MechanicalSystem:
        return MechanicalSystem(
            surfaces[0],
            surfaces[1],
            potential or self.potential_model(),
            self.dissipation_model(),
            self.masses,
        )


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    time: float
    q: np.ndarray
    r: float
    energy: float

    def to_record(self) -> Dict[str, Any]:
        return {"time": self.time, "q": self.q.tolist(), "r": self.r, "E": self.energy}


@dataclass(eq=False)
class SolveResult:
    """Outcome of one trajectory."""

    converged: bool
    distance: float
    closest_points: Tuple[np.ndarray, np.ndarray]
    minimizer: np.ndarray
    steps_taken: int
    final_energy: float
    final_gradient_norm: float
    velocity_norm: float
    initial_energy: float
    initial: np.ndarray
    seed: int = 0
    start_index: int = 0
    reseeded: bool = False
    trajectory: List[TrajectorySample] = field(default_factory=list)

    def to_record(self) -> Dict[str, Any]:
        """Plain JSON-ready mapping of the result."""
        return {
            "converged": self.converged,
            "distance": self.distance,
            "closest_point_a": self.closest_points[0].tolist(),
            "closest_point_b": self.closest_points[1].tolist(),
            "minimizer": self.minimizer.tolist(),
            "initial": self.initial.tolist(),
            "steps": self.steps_taken,
            "final_energy": self.final_energy,
            "initial_energy": self.initial_energy,
            "final_gradient_norm": self.final_gradient_norm,
            "velocity_norm": self.velocity_norm,
            "seed": self.seed,
            "start_index": self.start_index,
            "reseeded": self.reseeded,
        }

    def ranking_key(self) -> Tuple[float, float, int]:
        return (self.distance, self.final_energy, self.start_index)


def _is_converged(evaluation: FieldEvaluation, config: SolverConfig) -> bool:
    # inclusive on both thresholds
    return (
        evaluation.velocity_norm <= config.tol_velocity
        and evaluation.gradient_norm <= config.tol_gradient
    )


def check_convergence(
    state: ProductState, surfaces: Surfaces, potential: Potential, config: SolverConfig
) -> bool:
    """True iff |v|_g <= tol_velocity and |∇U|_g <= tol_gradient at ``state``."""
    evaluation = config.system(surfaces, potential).evaluate(state.q, state.v)
    return _is_converged(evaluation, config)


def _seed_box(surfaces: Surfaces) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = [], []
    for surface in surfaces:
        for interval in surface.domain:
            inset = 0.0 if interval.periodic else SEED_INSET * interval.width
            lo.append(interval.lo + inset)
            hi.append(interval.hi - inset)
    return np.array(lo), np.array(hi)


def _is_regular(surfaces: Surfaces, q: np.ndarray) -> bool:
    n = surfaces[0].param_dim
    return not (surfaces[0].jet(q[:n]).singular or surfaces[1].jet(q[n:]).singular)


def seed_points(surfaces: Surfaces, count: int, seed: int = 0) -> np.ndarray:
    """
    ``count`` quasi-random starting points over the stacked parameter box.

    Periodic parameters cover one period, clamped parameters are inset by 1%
    of their width. Points whose jet is singular on either surface are
    dropped and replaced by further draws.

    Raises:
        SolverError: no regular point found after repeated draws.
    """
    lo, hi = _seed_box(surfaces)
    sampler = qmc.Halton(d=lo.shape[0], scramble=True, seed=seed)
    points: List[np.ndarray] = []
    for _ in range(MAX_SEED_DRAWS):
        for q in qmc.scale(sampler.random(count), lo, hi):
            if _is_regular(surfaces, q):
                points.append(q)
                if len(points) == count:
                    return np.array(points)
            else:
                logger.debug("dropping singular seed %s", q.tolist())
    raise SolverError(f"could not draw {count} regular seeds")


def _random_point(surfaces: Surfaces, rng: np.random.Generator) -> np.ndarray:
    lo, hi = _seed_box(surfaces)
    for _ in range(MAX_SEED_DRAWS):
        q = rng.uniform(lo, hi)
        if _is_regular(surfaces, q):
            return q
    raise SolverError("could not draw a regular re-seed point")


def _sample(state: ProductState, evaluation: FieldEvaluation) -> TrajectorySample:
    return TrajectorySample(state.time, state.q.copy(), evaluation.distance, evaluation.energy)


def _integrate(
    system: MechanicalSystem, q0: np.ndarray, config: SolverConfig, start_index: int
) -> SolveResult:
    state = ProductState.at_rest(system.wrap(q0))
    evaluation = system.evaluate(state.q, state.v)
    initial_energy = evaluation.energy
    trajectory: List[TrajectorySample] = []
    logger.info(
        "start %d: q0=%s r=%.6g E=%.6g", start_index, state.q.tolist(), evaluation.distance, initial_energy
    )

    steps = 0
    converged = False
    while True:
        if config.record_trajectory and steps % config.sample_every == 0:
            trajectory.append(_sample(state, evaluation))
        if _is_converged(evaluation, config):
            converged = True
            break
        if steps >= config.max_steps:
            logger.warning(
                "start %d: no convergence after %d steps (|v|=%.3g, |grad U|=%.3g)",
                start_index,
                steps,
                evaluation.velocity_norm,
                evaluation.gradient_norm,
            )
            break
        state = step_rk4(state, system, config.dt, k1=evaluation.derivative)
        steps += 1
        evaluation = system.evaluate(state.q, state.v)
        if steps % config.sample_every == 0:
            logger.debug(
                "start %d step %d: r=%.12g E=%.12g |v|=%.3g",
                start_index,
                steps,
                evaluation.distance,
                evaluation.energy,
                evaluation.velocity_norm,
            )

    if config.record_trajectory and trajectory[-1].time != state.time:
        trajectory.append(_sample(state, evaluation))

    x, y = evaluation.jets[0].position, evaluation.jets[1].position
    result = SolveResult(
        converged=converged,
        distance=float(np.linalg.norm(y - x)),
        closest_points=(x, y),
        minimizer=state.q.copy(),
        steps_taken=steps,
        final_energy=evaluation.energy,
        final_gradient_norm=evaluation.gradient_norm,
        velocity_norm=evaluation.velocity_norm,
        initial_energy=initial_energy,
        initial=np.array(q0, dtype=float),
        seed=config.seed,
        start_index=start_index,
        trajectory=trajectory,
    )
    logger.info(
        "start %d: %s after %d steps, distance %.12g",
        start_index,
        "converged" if converged else "stopped",
        steps,
        result.distance,
    )
    return result


def solve(
    surfaces: Surfaces,
    potential: Optional[Potential] = None,
    config: Optional[SolverConfig] = None,
    initial: Optional[Sequence[float]] = None,
    start_index: int = 0,
) -> SolveResult:
    """
    Integrate from ``initial`` (at rest) until convergence or ``max_steps``.

    Args:
        surfaces: the two surfaces.
        potential: defaults to ``config.potential_model()``.
        config: solver settings, defaults to ``SolverConfig()``.
        initial: stacked starting parameters; the first quasi-random seed
            point when omitted.
        start_index: position of this run inside a multi-start batch.

    Returns:
        The result at the final state; ``converged`` is False when the step
        cap was hit.

    Raises:
        SingularMetric, DomainViolation: the trajectory failed twice, once
            from ``initial`` and once from a random re-seed.
        NonFiniteState: a step overflowed, usually because dt is too large.
    """
    config = config or SolverConfig()
    system = config.system(surfaces, potential)
    if initial is None:
        initial = seed_points(surfaces, 1, config.seed)[0]
    q0 = np.asarray(initial, dtype=float)
    if q0.shape != (system.dim,):
        raise ValidationError(f"expected {system.dim} parameters, got {q0.shape}", "initial")

    try:
        return _integrate(system, q0, config, start_index)
    except (SingularMetric, DomainViolation) as exc:
        rng = np.random.default_rng(config.seed + start_index)
        q1 = _random_point(surfaces, rng)
        logger.warning("start %d: %s; re-seeding at %s", start_index, exc, q1.tolist())
    result = _integrate(system, q1, config, start_index)
    result.reseeded = True
    return result


def best_of(results: Sequence[SolveResult]) -> SolveResult:
    """Smallest distance, then lower final energy, then earlier start."""
    return min(results, key=SolveResult.ranking_key)


def multi_start(
    surfaces: Surfaces, potential: Optional[Potential] = None, config: Optional[SolverConfig] = None
) -> SolveResult:
    """
    Solve from ``config.starts`` quasi-random seeds and keep the best
    converged result.

    Raises:
        AllStartsFailed: no trajectory converged; carries every result and
            every aborted trajectory's exception.
    """
    config = config or SolverConfig()
    seeds = seed_points(surfaces, config.starts, config.seed)

    def run(index: int) -> Union[SolveResult, GeometryError]:
        try:
            return solve(surfaces, potential, config, seeds[index], start_index=index)
        except GeometryError as exc:
            logger.warning("start %d aborted: %s", index, exc)
            return exc

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(run, range(config.starts)))
    else:
        outcomes = [run(i) for i in range(config.starts)]

    results = [o for o in outcomes if isinstance(o, SolveResult)]
    failures = [o for o in outcomes if not isinstance(o, SolveResult)]
    converged = [r for r in results if r.converged]
    if not converged:
        raise AllStartsFailed(results, failures)
    best = best_of(converged)
    logger.info(
        "%d/%d starts converged; best distance %.12g from start %d",
        len(converged),
        config.starts,
        best.distance,
        best.start_index,
    )
    return best


def normal_deviation(surfaces: Surfaces, q) -> float:
    """
    Largest |(y − x)·∂_a| / (r |∂_a|) over the tangent directions of both
    surfaces; zero when the separation is a common normal.
    """
    n = surfaces[0].param_dim
    q = np.asarray(q, dtype=float)
    jet1, jet2 = surfaces[0].jet(q[:n]), surfaces[1].jet(q[n:])
    r_vec = jet2.position - jet1.position
    r = float(np.linalg.norm(r_vec))
    worst = 0.0
    for jet in (jet1, jet2):
        for tangent in jet.jacobian.T:
            worst = max(worst, abs(float(r_vec @ tangent)) / (r * float(np.linalg.norm(tangent))))
    return worst
