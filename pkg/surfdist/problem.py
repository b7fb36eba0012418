"""
Problem documents: two surface specifications plus potential, solver and
output settings in one JSON object.

    {
      "surface_a": {...}, "surface_b": {...},
      "potential": {"kind": "harmonic", "stiffness": 1.0},
      "solver": {"dt": 0.01, "starts": 4, "seed": 0},
      "output": {"trajectory": true, "sample_every": 100}
    }

Only the two surfaces are required. Unknown keys are rejected at every
level, with the dotted path of the offending field in the error.
Built-in benchmarks are addressed as ``builtin:NAME``.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from .errors import InputError, ParseError, ValidationError
from .manifold import SurfaceDefinition, load_json, parse_surface_spec
from .solver import SolverConfig

BUILTIN_PREFIX = "builtin:"
DATA_DIR = Path(__file__).parent / "data"

SECTIONS = ("surface_a", "surface_b", "potential", "solver", "output")
POTENTIAL_FIELDS = {"kind": "potential", "stiffness": "stiffness", "exponent": "exponent"}
SOLVER_FIELDS = (
    "dt",
    "damping",
    "masses",
    "tol_velocity",
    "tol_gradient",
    "max_steps",
    "starts",
    "seed",
    "workers",
)
OUTPUT_FIELDS = {"trajectory": "record_trajectory", "sample_every": "sample_every"}

# SolverConfig field -> document path, for error messages
_FIELD_PATHS: Dict[str, str] = {
    **{cfg: f"potential.{key}" for key, cfg in POTENTIAL_FIELDS.items()},
    **{cfg: f"output.{key}" for key, cfg in OUTPUT_FIELDS.items()},
    **{name: f"solver.{name}" for name in SOLVER_FIELDS},
}


@dataclass(frozen=True, eq=False)
class ProblemDocument:
    """A parsed problem: the surface pair, solver settings and an optional start."""

    surface_a: SurfaceDefinition
    surface_b: SurfaceDefinition
    config: SolverConfig
    initial: Optional[np.ndarray] = None
    source: Optional[str] = None

    @property
    def surfaces(self) -> Tuple[SurfaceDefinition, SurfaceDefinition]:
        return self.surface_a, self.surface_b


def _section(document: Mapping[str, Any], key: str, allowed) -> Dict[str, Any]:
    value = document.get(key, {})
    if not isinstance(value, Mapping):
        raise ValidationError(f"expected an object, got {type(value).__name__}", key)
    for name in value:
        if name not in allowed:
            raise ValidationError("unknown field", f"{key}.{name}")
    return dict(value)


def _surface(document: Mapping[str, Any], key: str) -> SurfaceDefinition:
    if key not in document:
        raise ValidationError("missing required field", key)
    try:
        return parse_surface_spec(document[key])
    except ValidationError as exc:
        raise exc.within(key) from None
    except ParseError as exc:
        raise ParseError(f"{key}: {exc.message}", exc.line, exc.column, exc.loc) from None


def parse_problem(text: Union[str, Mapping[str, Any]], source: Optional[str] = None) -> ProblemDocument:
    """
    Parse a problem document.

    Args:
        text: JSON text, or the already decoded mapping.
        source: where the document came from, kept for messages.

    Raises:
        ParseError: invalid JSON (with line and column) or a bad expression.
        ValidationError: unknown or invalid fields, named by dotted path.
    """
    document = load_json(text) if isinstance(text, str) else text
    if not isinstance(document, Mapping):
        raise ParseError(f"problem document must be an object, got {type(document).__name__}")
    for key in document:
        if key not in SECTIONS:
            raise ValidationError("unknown field", key)

    surface_a = _surface(document, "surface_a")
    surface_b = _surface(document, "surface_b")
    if surface_a.ambient_dim != surface_b.ambient_dim:
        raise ValidationError(
            f"surface_b lives in R^{surface_b.ambient_dim}, surface_a in R^{surface_a.ambient_dim}",
            "surface_b.ambient_dim",
        )

    kwargs: Dict[str, Any] = {}
    for key, value in _section(document, "potential", POTENTIAL_FIELDS).items():
        kwargs[POTENTIAL_FIELDS[key]] = value
    solver = _section(document, "solver", SOLVER_FIELDS + ("initial",))
    initial = solver.pop("initial", None)
    kwargs.update(solver)
    for key, value in _section(document, "output", OUTPUT_FIELDS).items():
        kwargs[OUTPUT_FIELDS[key]] = value
    if "record_trajectory" in kwargs and not isinstance(kwargs["record_trajectory"], bool):
        raise ValidationError("expected true or false", "output.trajectory")

    try:
        config = SolverConfig(**kwargs)
    except ValidationError as exc:
        raise ValidationError(exc.message, _FIELD_PATHS.get(exc.field, exc.field)) from None
    except TypeError as exc:
        raise ValidationError(str(exc), "solver") from None

    if initial is not None:
        initial = _initial(initial, surface_a.param_dim + surface_b.param_dim)
    return ProblemDocument(surface_a, surface_b, config, initial, source)


def config_sections(config: SolverConfig) -> Dict[str, Dict[str, Any]]:
    """
    The potential, solver and output sections that rebuild ``config``.

    Merged with the two surfaces, the result is a problem document that
    reruns the same solve without any command-line overrides.
    """
    solver = {name: getattr(config, name) for name in SOLVER_FIELDS}
    if solver["masses"] is None:
        del solver["masses"]
    else:
        solver["masses"] = list(solver["masses"])
    return {
        "potential": {key: getattr(config, cfg) for key, cfg in POTENTIAL_FIELDS.items()},
        "solver": solver,
        "output": {key: getattr(config, cfg) for key, cfg in OUTPUT_FIELDS.items()},
    }


def _initial(value: Any, dim: int) -> np.ndarray:
    if (
        not isinstance(value, list)
        or len(value) != dim
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise ValidationError(f"expected a list of {dim} numbers", "solver.initial")
    return np.array(value, dtype=float)


def builtin_names() -> List[str]:
    """Names of the benchmark documents shipped with the package."""
    return sorted(p.stem for p in DATA_DIR.glob("*.json"))


def load_problem(location: str) -> ProblemDocument:
    """
    Read a problem document from a file path or ``builtin:NAME``.

    Raises:
        InputError: unknown built-in name or unreadable file.
    """
    if location.startswith(BUILTIN_PREFIX):
        name = location[len(BUILTIN_PREFIX):]
        path = DATA_DIR / f"{name}.json"
        if name not in builtin_names():
            raise InputError(f"unknown built-in problem {name!r}; available: {builtin_names()}")
    else:
        path = Path(location)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {location}: {exc.strerror or exc}") from None
    return parse_problem(text, source=location)
